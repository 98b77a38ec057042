/** Canvas drawing: environment, trajectories, preview overlays, panels.
 *
 * Pure functions of (state, context, viewport) so tests can drive them
 * with a recording stub context. Preview overlays use distinct dash
 * patterns per kernel slot; the committed trajectory is always solid.
 */

import { toScreen, type Viewport } from "./geometry";
import { kernelLabel, type AppState } from "./store";
import type { Point } from "./types";

/** Distinct dash patterns for up to three simultaneous kernel previews. */
export const OVERLAY_DASHES: number[][] = [
  [8, 5],
  [2, 4],
  [12, 3, 3, 3],
];

export const OVERLAY_COLORS = ["#1f77b4", "#9467bd", "#17becf"];

const TYPE_COLORS = ["#2ca02c", "#d62728", "#1f77b4", "#ff7f0e", "#8c564b", "#7f7f7f"];

/** Structural subset of CanvasRenderingContext2D used by the renderer. */
export interface Canvas2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  stroke(): void;
  fill(): void;
  setLineDash(segments: number[]): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
}

function polyline(ctx: Canvas2D, points: number[][], vp: Viewport): void {
  ctx.beginPath();
  points.forEach((p, i) => {
    const [x, y] = toScreen([p[0], p[1]], vp);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}

function dot(ctx: Canvas2D, at: Point, radius: number): void {
  ctx.beginPath();
  ctx.arc(at[0], at[1], radius, 0, 2 * Math.PI);
  ctx.fill();
}

export function drawScene(ctx: Canvas2D, state: AppState, vp: Viewport): void {
  ctx.clearRect(0, 0, vp.width, vp.height);
  const session = state.session;
  if (!session) return;

  ctx.globalAlpha = 0.35;
  for (const obstacle of session.env.obstacles) {
    ctx.fillStyle = TYPE_COLORS[obstacle.type_id % TYPE_COLORS.length];
    const center = toScreen([obstacle.position[0], obstacle.position[1]], vp);
    const edge = toScreen([obstacle.position[0] + obstacle.radius, obstacle.position[1]], vp);
    dot(ctx, center, Math.abs(edge[0] - center[0]));
  }
  ctx.globalAlpha = 1.0;

  // start / goal markers
  ctx.fillStyle = "#000";
  dot(ctx, toScreen([session.env.start[0], session.env.start[1]], vp), 6);
  dot(ctx, toScreen([session.env.goal[0], session.env.goal[1]], vp), 6);

  // committed plan: always solid
  ctx.setLineDash([]);
  ctx.strokeStyle = "#333";
  ctx.lineWidth = 2;
  polyline(ctx, session.trajectory, vp);
  ctx.fillStyle = "#333";
  for (let i = 1; i < session.trajectory.length - 1; i++) {
    dot(ctx, toScreen([session.trajectory[i][0], session.trajectory[i][1]], vp), 3);
  }

  // kernel previews: dashed, one pattern per slot
  state.overlays.forEach((overlay, slot) => {
    if (!overlay.trajectory) return;
    ctx.setLineDash(OVERLAY_DASHES[slot % OVERLAY_DASHES.length]);
    ctx.strokeStyle = OVERLAY_COLORS[slot % OVERLAY_COLORS.length];
    ctx.lineWidth = 2;
    polyline(ctx, overlay.trajectory, vp);
  });
  ctx.setLineDash([]);

  if (state.drag) {
    ctx.fillStyle = "#d62728";
    dot(ctx, toScreen(state.drag.position, vp), 5);
  }
}

export function drawWeights(ctx: Canvas2D, weights: number[], width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  if (weights.length === 0) return;
  const limit = Math.max(1e-9, ...weights.map((w) => Math.abs(w)));
  const bar = width / weights.length;
  const mid = height / 2;
  weights.forEach((w, k) => {
    const h = (Math.abs(w) / limit) * (height / 2 - 12);
    ctx.fillStyle = TYPE_COLORS[k % TYPE_COLORS.length];
    ctx.beginPath();
    ctx.rect(k * bar + 4, w >= 0 ? mid - h : mid, bar - 8, Math.max(1, h));
    ctx.fill();
    ctx.fillStyle = "#333";
    ctx.font = "11px sans-serif";
    ctx.fillText(w.toFixed(3), k * bar + 4, height - 2);
  });
  ctx.strokeStyle = "#999";
  ctx.setLineDash([]);
  ctx.beginPath();
  ctx.moveTo(0, mid);
  ctx.lineTo(width, mid);
  ctx.stroke();
}

export function drawCurve(ctx: Canvas2D, curve: number[], width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  if (curve.length === 0) {
    ctx.fillStyle = "#777";
    ctx.font = "12px sans-serif";
    ctx.fillText("no ground truth for this session", 8, height / 2);
    return;
  }
  const top = Math.max(1.0, ...curve);
  const pad = 18;
  const x = (i: number) =>
    pad + (curve.length === 1 ? 0 : (i / (curve.length - 1)) * (width - 2 * pad));
  const y = (c: number) => height - pad - (c / top) * (height - 2 * pad);
  ctx.strokeStyle = "#1f77b4";
  ctx.lineWidth = 2;
  ctx.setLineDash([]);
  ctx.beginPath();
  curve.forEach((c, i) => {
    if (i === 0) ctx.moveTo(x(i), y(c));
    else ctx.lineTo(x(i), y(c));
  });
  ctx.stroke();
  ctx.fillStyle = "#1f77b4";
  curve.forEach((c, i) => dot(ctx, [x(i), y(c)], 3));
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  ctx.fillText("normalized cost per iteration", 8, 12);
  const last = curve[curve.length - 1];
  ctx.fillText(last.toFixed(4), width - 60, y(last) - 6);
}

export function overlayLegend(state: AppState): string[] {
  return state.previewKernels.map((k, slot) => `${kernelLabel(k)} [${slot + 1}]`);
}
