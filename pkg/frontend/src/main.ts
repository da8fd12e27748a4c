/** Wiring: DOM, socket, input, render loop. */

import { TeleopClient } from './client.js';
import { InputModel, RUDDER_MAX_DEG } from './input.js';
import { hudText, render } from './render.js';
import { ViewState } from './view_state.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const canvas = el<HTMLCanvasElement>('pool');
const ctx = canvas.getContext('2d');
if (ctx === null) {
  throw new Error('canvas 2d context unavailable');
}

const banner = el<HTMLDivElement>('banner');
const hud = el<HTMLDivElement>('hud');
const urlInput = el<HTMLInputElement>('url');
const connectBtn = el<HTMLButtonElement>('connect');
const exportBtn = el<HTMLButtonElement>('export');
const resetBtn = el<HTMLButtonElement>('reset');
const rudderSlider = el<HTMLInputElement>('rudder');
const trimSlider = el<HTMLInputElement>('trim');
const pwmInput = el<HTMLInputElement>('pwm');
const scenarioLabel = el<HTMLDivElement>('scenario');

const view = new ViewState();
const input = new InputModel(view);

let poolLength = 10;
let poolWidth = 6;

const client = new TeleopClient(view, {
  onHello: (hello) => {
    const pool = (hello.scenario.pool ?? {}) as { length?: number; width?: number };
    poolLength = pool.length ?? 10;
    poolWidth = pool.width ?? 6;
    scenarioLabel.textContent =
      `scenario: ${String(hello.scenario.name ?? 'unnamed')}  ` +
      `boat: ${String(hello.scenario.boat_variant ?? '?')}  ` +
      `dt=${hello.dt}s  ${hello.steps_per_second} steps/s, ${hello.broadcast_hz} Hz`;
  },
  onRecord: (record) => {
    const blob = new Blob([JSON.stringify(record, null, 1)], { type: 'application/json' });
    const a = document.createElement('a');
    a.href = URL.createObjectURL(blob);
    a.download = 'session_record.json';
    a.click();
    URL.revokeObjectURL(a.href);
  },
  onStatusChange: (status, detail) => {
    banner.dataset.status = status;
    if (status === 'connected') {
      banner.textContent = `connected - ${detail}`;
    } else if (status === 'connecting') {
      banner.textContent = `connecting to ${detail} ...`;
    } else if (status === 'incompatible') {
      banner.textContent = detail;
    } else {
      banner.textContent = `disconnected${detail ? ` - ${detail}` : ''} (press Connect to retry)`;
    }
  },
});

connectBtn.addEventListener('click', () => client.connect(urlInput.value));
exportBtn.addEventListener('click', () => client.requestExport());
resetBtn.addEventListener('click', () => {
  view.clearTrajectory();
  client.sendControl({ reset: true });
});

rudderSlider.min = String(-RUDDER_MAX_DEG);
rudderSlider.max = String(RUDDER_MAX_DEG);
rudderSlider.addEventListener('input', () => input.setRudderDeg(Number(rudderSlider.value)));
trimSlider.addEventListener('input', () => input.setTrimDeg(Number(trimSlider.value)));
pwmInput.addEventListener('input', () => {
  input.pwmLevel = Number(pwmInput.value);
});

window.addEventListener('keydown', (ev) => {
  if (ev.target instanceof HTMLInputElement && ev.target.type === 'text') {
    return;
  }
  input.keyDown(ev.key, performance.now());
});
window.addEventListener('keyup', (ev) => input.keyUp(ev.key, performance.now()));

function frame(nowMs: number): void {
  input.tick(nowMs);
  rudderSlider.value = String(Math.round(input.getRudderDeg()));
  trimSlider.value = String(Math.round(input.getTrimDeg()));
  render(ctx!, view, poolLength, poolWidth);
  hud.textContent = hudText(view, nowMs);
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
