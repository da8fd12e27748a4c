import { describe, expect, it } from 'vitest';

import {
  boatOutline,
  inNoGo,
  nogoConePoints,
  normalizeAngle,
  upwindHeading,
  worldToCanvas,
} from '../src/geometry.js';

const DEG = Math.PI / 180;

describe('angles', () => {
  it('normalizes into (-pi, pi]', () => {
    expect(normalizeAngle(0)).toBe(0);
    expect(normalizeAngle(3 * Math.PI)).toBeCloseTo(Math.PI);
    expect(normalizeAngle(-Math.PI)).toBeCloseTo(Math.PI);
    expect(normalizeAngle(290 * DEG)).toBeCloseTo(-70 * DEG);
  });

  it('upwind is opposite the blow-toward direction', () => {
    expect(upwindHeading(Math.PI)).toBeCloseTo(0);
    expect(upwindHeading(0)).toBeCloseTo(Math.PI);
  });
});

describe('no-go cone', () => {
  const windDir = Math.PI; // blowing along -x, upwind = heading 0
  const half = 41 * DEG;

  it('dead upwind is inside', () => {
    expect(inNoGo(0, windDir, half)).toBe(true);
  });

  it('dead downwind is outside', () => {
    expect(inNoGo(Math.PI, windDir, half)).toBe(false);
  });

  it('boundary heading counts as inside (closed cone)', () => {
    expect(inNoGo(half, windDir, half)).toBe(true);
    expect(inNoGo(half + 0.01, windDir, half)).toBe(false);
  });

  it('cone polygon spans the half angle both sides of upwind', () => {
    const pts = nogoConePoints(2, 3, windDir, half, 2.0);
    expect(pts[0]).toEqual([2, 3]);
    const first = pts[1]!;
    const last = pts[pts.length - 1]!;
    const angFirst = Math.atan2(first[1] - 3, first[0] - 2);
    const angLast = Math.atan2(last[1] - 3, last[0] - 2);
    expect(angFirst).toBeCloseTo(-half);
    expect(angLast).toBeCloseTo(half);
  });
});

describe('canvas mapping', () => {
  const vp = { canvasW: 860, canvasH: 540, poolLength: 10, poolWidth: 6, margin: 24 };

  it('maps the origin to the margin corner', () => {
    expect(worldToCanvas(vp, 0, 0)).toEqual([24, 24]);
  });

  it('preserves aspect ratio with a single scale', () => {
    const [x1] = worldToCanvas(vp, 1, 0);
    const [, y1] = worldToCanvas(vp, 0, 1);
    expect(x1 - 24).toBeCloseTo(y1 - 24);
  });

  it('positive psi swings the bow toward +y (clockwise on screen)', () => {
    const bowAhead = boatOutline(0, 0, 0, 0.6, 0.36)[0]!;
    expect(bowAhead[0]).toBeCloseTo(0.3);
    expect(bowAhead[1]).toBeCloseTo(0);
    const bowTurned = boatOutline(0, 0, 30 * DEG, 0.6, 0.36)[0]!;
    expect(bowTurned[1]).toBeGreaterThan(0); // +y side, rendered downward
  });
});
