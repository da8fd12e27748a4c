/**
 * Client-side state store: latest broadcast, decimated trajectory, pending
 * command, propeller press timers, session status.
 *
 * The rendered pose always comes from the latest received broadcast; the
 * client never extrapolates. The trajectory polyline is decimated by a
 * distance threshold (not time), so the slow drift around the turning
 * point stays dense while fast straight legs thin out.
 */

import type { Command, StateBroadcast } from './protocol.js';
import { NEUTRAL_COMMAND, commandsEqual } from './protocol.js';

export const MAX_TRAJECTORY_POINTS = 5000;
export const DECIMATION_DISTANCE = 0.015; // m between kept points

export type SessionStatus = 'disconnected' | 'connecting' | 'connected' | 'incompatible';

export interface PropPress {
  side: 'left' | 'right';
  startedAtMs: number;
}

export class ViewState {
  status: SessionStatus = 'disconnected';
  statusDetail = '';
  latest: StateBroadcast | null = null;
  trajectory: Array<[number, number]> = [];
  pending: Command = { ...NEUTRAL_COMMAND };
  lastSent: Command = { ...NEUTRAL_COMMAND };
  press: PropPress | null = null;
  lastPressSeconds = 0; // elapsed of the most recent finished press
  nogoHalfAngle = (41 * Math.PI) / 180;

  applyBroadcast(msg: StateBroadcast): void {
    this.latest = msg;
    this.pushTrajectoryPoint(msg.x, msg.y);
  }

  pushTrajectoryPoint(x: number, y: number): void {
    const last = this.trajectory[this.trajectory.length - 1];
    if (last !== undefined) {
      const dx = x - last[0];
      const dy = y - last[1];
      if (Math.hypot(dx, dy) < DECIMATION_DISTANCE) {
        return;
      }
    }
    this.trajectory.push([x, y]);
    if (this.trajectory.length > MAX_TRAJECTORY_POINTS) {
      // thin the oldest half: keeps the recent (interesting) region dense
      const keep: Array<[number, number]> = [];
      for (let i = 0; i < this.trajectory.length; i += 1) {
        const pt = this.trajectory[i]!;
        if (i >= this.trajectory.length / 2 || i % 2 === 0) {
          keep.push(pt);
        }
      }
      this.trajectory = keep;
    }
  }

  clearTrajectory(): void {
    this.trajectory = [];
  }

  /** Press-and-hold a propeller key; returns false if already pressed. */
  startPress(side: 'left' | 'right', nowMs: number): boolean {
    if (this.press !== null) {
      return this.press.side === side ? false : false;
    }
    this.press = { side, startedAtMs: nowMs };
    return true;
  }

  /** Elapsed on-time of the active press, seconds (0.01 s display grain). */
  pressElapsed(nowMs: number): number {
    if (this.press === null) {
      return 0;
    }
    return Math.max(0, (nowMs - this.press.startedAtMs) / 1000);
  }

  endPress(nowMs: number): number {
    if (this.press === null) {
      return 0;
    }
    this.lastPressSeconds = this.pressElapsed(nowMs);
    this.press = null;
    return this.lastPressSeconds;
  }

  /**
   * The command to transmit this broadcast interval, or null when the
   * pending command equals what was already sent (quiescent client sends
   * no traffic, and edits coalesce to at most one command per interval).
   */
  commandToSend(): Command | null {
    if (commandsEqual(this.pending, this.lastSent)) {
      return null;
    }
    const cmd = { ...this.pending };
    this.lastSent = cmd;
    return cmd;
  }
}

/** Format a press duration the way the study reports it: 0.01 s grain. */
export function formatPressSeconds(seconds: number): string {
  return (Math.round(seconds * 100) / 100).toFixed(2);
}
