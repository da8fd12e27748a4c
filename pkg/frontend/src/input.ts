/**
 * Keyboard/slider input model (RC-stick style), kept free of DOM so the
 * mapping logic is unit-testable.
 *
 * A/D hold the rudder over left/right, W/S trim the sheet in/out, J/L hold
 * a propeller at the configured duty (with the on-time readout), R toggles
 * the sheet release.
 */

import type { Command } from './protocol.js';
import type { ViewState } from './view_state.js';

export const RUDDER_MAX_DEG = 30;
export const RUDDER_RATE_DEG_S = 90;  // full deflection in a third of a second
export const TRIM_RATE_DEG_S = 45;
export const DEFAULT_PWM = 17;

export class InputModel {
  pwmLevel = DEFAULT_PWM;
  private held = new Set<string>();
  private lastTickMs: number | null = null;
  private rudderDeg = 0;
  private trimDeg = 30;

  constructor(private readonly view: ViewState) {}

  keyDown(key: string, nowMs: number): void {
    const k = key.toLowerCase();
    if (this.held.has(k)) {
      return; // ignore auto-repeat
    }
    this.held.add(k);
    if (k === 'j' || k === 'l') {
      const side = k === 'j' ? 'left' : 'right';
      this.view.startPress(side, nowMs);
      this.applyProps();
    }
    if (k === 'r') {
      this.view.pending.sail_released = !this.view.pending.sail_released;
    }
  }

  keyUp(key: string, nowMs: number): void {
    const k = key.toLowerCase();
    this.held.delete(k);
    if (k === 'j' || k === 'l') {
      const side = k === 'j' ? 'left' : 'right';
      if (this.view.press !== null && this.view.press.side === side) {
        this.view.endPress(nowMs);
      }
      this.applyProps();
    }
  }

  setRudderDeg(deg: number): void {
    this.rudderDeg = Math.max(-RUDDER_MAX_DEG, Math.min(RUDDER_MAX_DEG, deg));
    this.view.pending.rudder_angle = (this.rudderDeg * Math.PI) / 180;
  }

  setTrimDeg(deg: number): void {
    this.trimDeg = Math.max(0, Math.min(90, deg));
    this.view.pending.sail_angle = (this.trimDeg * Math.PI) / 180;
  }

  getRudderDeg(): number {
    return this.rudderDeg;
  }

  getTrimDeg(): number {
    return this.trimDeg;
  }

  /** Integrate held steering keys; call once per animation frame. */
  tick(nowMs: number): void {
    const dt = this.lastTickMs === null ? 0 : (nowMs - this.lastTickMs) / 1000;
    this.lastTickMs = nowMs;
    if (dt <= 0) {
      return;
    }
    if (this.held.has('a') !== this.held.has('d')) {
      const dir = this.held.has('d') ? 1 : -1;
      this.setRudderDeg(this.rudderDeg + dir * RUDDER_RATE_DEG_S * dt);
    }
    if (this.held.has('w') !== this.held.has('s')) {
      const dir = this.held.has('s') ? 1 : -1; // s eases the sheet out
      this.setTrimDeg(this.trimDeg + dir * TRIM_RATE_DEG_S * dt);
    }
  }

  private applyProps(): void {
    const press = this.view.press;
    this.view.pending.pwm_left = press !== null && press.side === 'left' ? this.pwmLevel : 0;
    this.view.pending.pwm_right = press !== null && press.side === 'right' ? this.pwmLevel : 0;
  }

  snapshotCommand(): Command {
    return { ...this.view.pending };
  }
}
