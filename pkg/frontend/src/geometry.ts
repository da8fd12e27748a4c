/**
 * Pure geometry for the top-down pool view.
 *
 * World axes: x is the upwind direction of the shipped pool (drawn to the
 * right), y is lateral (drawn downward, canvas-native). With heading
 * measured toward +y, a positive-psi ("starboard") turn renders clockwise,
 * matching what the physical boat does.
 */

export interface Viewport {
  canvasW: number;
  canvasH: number;
  poolLength: number; // world x extent (m)
  poolWidth: number;  // world y extent (m)
  margin: number;     // px
}

export function worldToCanvas(
  vp: Viewport,
  x: number,
  y: number,
): [number, number] {
  const sx = (vp.canvasW - 2 * vp.margin) / vp.poolLength;
  const sy = (vp.canvasH - 2 * vp.margin) / vp.poolWidth;
  const s = Math.min(sx, sy);
  return [vp.margin + x * s, vp.margin + y * s];
}

export function scale(vp: Viewport): number {
  const sx = (vp.canvasW - 2 * vp.margin) / vp.poolLength;
  const sy = (vp.canvasH - 2 * vp.margin) / vp.poolWidth;
  return Math.min(sx, sy);
}

export function normalizeAngle(a: number): number {
  let r = a % (2 * Math.PI);
  if (r <= -Math.PI) r += 2 * Math.PI;
  if (r > Math.PI) r -= 2 * Math.PI;
  return r;
}

/** Heading of dead upwind for a wind blowing toward `windDir`. */
export function upwindHeading(windDir: number): number {
  return normalizeAngle(windDir + Math.PI);
}

/** True iff a heading lies inside the closed no-go cone. */
export function inNoGo(heading: number, windDir: number, halfAngle: number): boolean {
  return Math.abs(normalizeAngle(heading - upwindHeading(windDir))) <= halfAngle;
}

/**
 * The no-go cone as a world-space triangle fan around a vertex: vertex plus
 * points along the two cone edges at the given reach (meters).
 */
export function nogoConePoints(
  vertexX: number,
  vertexY: number,
  windDir: number,
  halfAngle: number,
  reach: number,
): Array<[number, number]> {
  const up = upwindHeading(windDir);
  const pts: Array<[number, number]> = [[vertexX, vertexY]];
  const steps = 16;
  for (let i = 0; i <= steps; i += 1) {
    const a = up - halfAngle + (2 * halfAngle * i) / steps;
    pts.push([vertexX + reach * Math.cos(a), vertexY + reach * Math.sin(a)]);
  }
  return pts;
}

/** Boat hull outline (a pointed pentagon) in world coordinates. */
export function boatOutline(
  x: number,
  y: number,
  psi: number,
  length: number,
  beam: number,
): Array<[number, number]> {
  const local: Array<[number, number]> = [
    [length / 2, 0],
    [length / 6, beam / 2],
    [-length / 2, beam / 2],
    [-length / 2, -beam / 2],
    [length / 6, -beam / 2],
  ];
  const c = Math.cos(psi);
  const s = Math.sin(psi);
  return local.map(([lx, ly]) => [x + lx * c - ly * s, y + lx * s + ly * c]);
}
