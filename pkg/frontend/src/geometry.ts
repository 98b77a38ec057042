/** Workspace <-> screen mapping and waypoint hit-testing.
 *
 * The planning workspace is the fixed square [0, 10]^2, mapped into the
 * canvas with a uniform scale and a margin. Screen y grows downward, so
 * the vertical axis flips.
 */

import type { Point } from "./types";

export const WORKSPACE_MIN = 0;
export const WORKSPACE_MAX = 10;

/** Minimum pointer-target radius for grabbing a waypoint, in pixels. */
export const HIT_RADIUS_PX = 10;

export interface Viewport {
  width: number;
  height: number;
  margin: number;
}

function scale(vp: Viewport): number {
  const span = WORKSPACE_MAX - WORKSPACE_MIN;
  return Math.min(vp.width - 2 * vp.margin, vp.height - 2 * vp.margin) / span;
}

export function toScreen(p: Point, vp: Viewport): Point {
  const s = scale(vp);
  return [
    vp.margin + (p[0] - WORKSPACE_MIN) * s,
    vp.height - vp.margin - (p[1] - WORKSPACE_MIN) * s,
  ];
}

export function toWorkspace(p: Point, vp: Viewport): Point {
  const s = scale(vp);
  return [
    WORKSPACE_MIN + (p[0] - vp.margin) / s,
    WORKSPACE_MIN + (vp.height - vp.margin - p[1]) / s,
  ];
}

export function clampToWorkspace(p: Point): Point {
  const clamp = (v: number) => Math.min(WORKSPACE_MAX, Math.max(WORKSPACE_MIN, v));
  return [clamp(p[0]), clamp(p[1])];
}

/**
 * Index of the interior waypoint under the pointer, or null.
 *
 * Endpoints are never returned: they are pinned by the planner and the
 * service rejects corrections at them.
 */
export function hitTestWaypoint(
  trajectory: number[][],
  screen: Point,
  vp: Viewport,
  radiusPx: number = HIT_RADIUS_PX,
): number | null {
  let best: number | null = null;
  let bestDist = radiusPx;
  for (let i = 1; i < trajectory.length - 1; i++) {
    const [sx, sy] = toScreen([trajectory[i][0], trajectory[i][1]], vp);
    const dist = Math.hypot(sx - screen[0], sy - screen[1]);
    if (dist <= bestDist) {
      best = i;
      bestDist = dist;
    }
  }
  return best;
}
