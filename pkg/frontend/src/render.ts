/**
 * Canvas drawing: pool, trajectory, boat, wind arrow, no-go cone, HUD text.
 * Reads immutable snapshots from the store; no state of its own.
 */

import { boatOutline, nogoConePoints, scale, worldToCanvas } from './geometry.js';
import type { Viewport } from './geometry.js';
import type { ViewState } from './view_state.js';
import { formatPressSeconds } from './view_state.js';

const POOL_COLOR = '#123a5e';
const GRID_COLOR = 'rgba(255,255,255,0.08)';
const TRAIL_COLOR = '#ffd54a';
const BOAT_COLOR = '#ff5252';
const CONE_COLOR = 'rgba(255,82,82,0.18)';
const WIND_COLOR = '#9ef01a';

export function render(
  ctx: CanvasRenderingContext2D,
  view: ViewState,
  poolLength: number,
  poolWidth: number,
): void {
  const vp: Viewport = {
    canvasW: ctx.canvas.width,
    canvasH: ctx.canvas.height,
    poolLength,
    poolWidth,
    margin: 24,
  };
  ctx.fillStyle = '#0b1f33';
  ctx.fillRect(0, 0, vp.canvasW, vp.canvasH);

  // pool
  const [px0, py0] = worldToCanvas(vp, 0, 0);
  const [px1, py1] = worldToCanvas(vp, poolLength, poolWidth);
  ctx.fillStyle = POOL_COLOR;
  ctx.fillRect(px0, py0, px1 - px0, py1 - py0);
  ctx.strokeStyle = GRID_COLOR;
  ctx.lineWidth = 1;
  for (let gx = 0; gx <= poolLength; gx += 1) {
    const [cx] = worldToCanvas(vp, gx, 0);
    ctx.beginPath();
    ctx.moveTo(cx, py0);
    ctx.lineTo(cx, py1);
    ctx.stroke();
  }
  for (let gy = 0; gy <= poolWidth; gy += 1) {
    const [, cy] = worldToCanvas(vp, 0, gy);
    ctx.beginPath();
    ctx.moveTo(px0, cy);
    ctx.lineTo(px1, cy);
    ctx.stroke();
  }

  const latest = view.latest;
  if (latest === null) {
    ctx.fillStyle = '#ffffff';
    ctx.font = '16px system-ui, sans-serif';
    ctx.fillText('waiting for telemetry...', px0 + 16, py0 + 28);
    return;
  }

  // no-go cone (pure presentation from the broadcast wind direction)
  const cone = nogoConePoints(latest.x, latest.y, latest.wind_dir, view.nogoHalfAngle, 2.5);
  ctx.fillStyle = CONE_COLOR;
  ctx.beginPath();
  cone.forEach(([wx, wy], i) => {
    const [cx, cy] = worldToCanvas(vp, wx, wy);
    if (i === 0) ctx.moveTo(cx, cy);
    else ctx.lineTo(cx, cy);
  });
  ctx.closePath();
  ctx.fill();

  // trajectory polyline
  if (view.trajectory.length > 1) {
    ctx.strokeStyle = TRAIL_COLOR;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    view.trajectory.forEach(([wx, wy], i) => {
      const [cx, cy] = worldToCanvas(vp, wx, wy);
      if (i === 0) ctx.moveTo(cx, cy);
      else ctx.lineTo(cx, cy);
    });
    ctx.stroke();
  }

  // boat
  const s = scale(vp);
  ctx.fillStyle = BOAT_COLOR;
  ctx.beginPath();
  boatOutline(latest.x, latest.y, latest.psi, 0.6, 0.36).forEach(([wx, wy], i) => {
    const [cx, cy] = worldToCanvas(vp, wx, wy);
    if (i === 0) ctx.moveTo(cx, cy);
    else ctx.lineTo(cx, cy);
  });
  ctx.closePath();
  ctx.fill();

  // wind arrow in the corner, pointing the way the wind blows
  const ax = px1 - 50;
  const ay = py0 + 40;
  const len = 28;
  ctx.strokeStyle = WIND_COLOR;
  ctx.fillStyle = WIND_COLOR;
  ctx.lineWidth = 3;
  const dx = Math.cos(latest.wind_dir);
  const dy = Math.sin(latest.wind_dir);
  ctx.beginPath();
  ctx.moveTo(ax - dx * len, ay - dy * len);
  ctx.lineTo(ax + dx * len, ay + dy * len);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(ax + dx * (len + 8), ay + dy * (len + 8));
  ctx.lineTo(ax + dx * len - dy * 6, ay + dy * len + dx * 6);
  ctx.lineTo(ax + dx * len + dy * 6, ay + dy * len - dx * 6);
  ctx.closePath();
  ctx.fill();
  ctx.font = '12px system-ui, sans-serif';
  ctx.fillText(`wind ${latest.wind_speed.toFixed(2)} m/s`, ax - 46, ay + 50);

  // boat marker ring while a propeller is held
  if (view.press !== null) {
    const [cx, cy] = worldToCanvas(vp, latest.x, latest.y);
    ctx.strokeStyle = '#ffffff';
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(cx, cy, 0.5 * s, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

export function hudText(view: ViewState, nowMs: number): string {
  const latest = view.latest;
  const press = view.press;
  const pressLine =
    press !== null
      ? `prop ${press.side} ON ${formatPressSeconds(view.pressElapsed(nowMs))} s`
      : `last press ${formatPressSeconds(view.lastPressSeconds)} s`;
  if (latest === null) {
    return pressLine;
  }
  const act = latest.actuator;
  const clamped = latest.clamped.length > 0 ? `  clamped: ${latest.clamped.join(',')}` : '';
  return (
    `t=${latest.t.toFixed(2)}s tick=${latest.tick}  ` +
    `u=${latest.u.toFixed(3)} m/s  psi=${((latest.psi * 180) / Math.PI).toFixed(1)} deg  ` +
    `rudder=${((act.rudder_angle * 180) / Math.PI).toFixed(1)} deg  ` +
    `sheet=${((act.sail_angle * 180) / Math.PI).toFixed(1)} deg${act.sail_released ? ' (released)' : ''}  ` +
    `pwm L/R=${act.pwm_left.toFixed(0)}/${act.pwm_right.toFixed(0)}  ${pressLine}${clamped}`
  );
}
