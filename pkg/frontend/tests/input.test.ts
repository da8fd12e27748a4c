import { describe, expect, it } from 'vitest';

import { DEFAULT_PWM, InputModel, RUDDER_MAX_DEG, RUDDER_RATE_DEG_S } from '../src/input.js';
import { ViewState } from '../src/view_state.js';

describe('propeller hold keys', () => {
  it('J holds the left propeller at the configured duty and times the press', () => {
    const view = new ViewState();
    const input = new InputModel(view);
    input.keyDown('j', 1000);
    expect(view.pending.pwm_left).toBe(DEFAULT_PWM);
    expect(view.pending.pwm_right).toBe(0);
    expect(view.pressElapsed(3100)).toBeCloseTo(2.1);
    input.keyUp('j', 3100);
    expect(view.pending.pwm_left).toBe(0);
    expect(view.lastPressSeconds).toBeCloseTo(2.1);
  });

  it('L drives the right propeller; auto-repeat keydown is ignored', () => {
    const view = new ViewState();
    const input = new InputModel(view);
    input.keyDown('l', 0);
    input.keyDown('l', 500); // key auto-repeat must not restart the timer
    expect(view.pressElapsed(1000)).toBeCloseTo(1.0);
    input.keyUp('l', 1000);
    expect(view.pending.pwm_right).toBe(0);
  });

  it('duty level edits apply to the next hold', () => {
    const view = new ViewState();
    const input = new InputModel(view);
    input.pwmLevel = 21;
    input.keyDown('j', 0);
    expect(view.pending.pwm_left).toBe(21);
  });
});

describe('steering keys', () => {
  it('D swings the rudder toward starboard at the configured rate', () => {
    const view = new ViewState();
    const input = new InputModel(view);
    input.tick(0);
    input.keyDown('d', 0);
    input.tick(100); // 0.1 s
    expect(input.getRudderDeg()).toBeCloseTo(RUDDER_RATE_DEG_S * 0.1);
    expect(view.pending.rudder_angle).toBeCloseTo((RUDDER_RATE_DEG_S * 0.1 * Math.PI) / 180);
  });

  it('rudder saturates at the limit', () => {
    const view = new ViewState();
    const input = new InputModel(view);
    input.tick(0);
    input.keyDown('a', 0);
    input.tick(5000);
    expect(input.getRudderDeg()).toBe(-RUDDER_MAX_DEG);
  });

  it('R toggles the sheet release', () => {
    const view = new ViewState();
    const input = new InputModel(view);
    input.keyDown('r', 0);
    expect(view.pending.sail_released).toBe(true);
    input.keyUp('r', 50);
    input.keyDown('r', 100);
    expect(view.pending.sail_released).toBe(false);
  });

  it('sliders clamp to their ranges', () => {
    const view = new ViewState();
    const input = new InputModel(view);
    input.setRudderDeg(999);
    expect(input.getRudderDeg()).toBe(RUDDER_MAX_DEG);
    input.setTrimDeg(-20);
    expect(input.getTrimDeg()).toBe(0);
  });
});
