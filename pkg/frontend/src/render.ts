// Canvas rendering of a scene: graph curve, axis points, dashed verticals,
// arrowed tangent segments, the draggable start handle, the basin strip,
// and the annotation block.

import { Frame, Viewport, worldToPx, worldToPy } from "./transform.js";
import type { UiState } from "./model.js";
import type { BasinJson } from "./types.js";

export const HANDLE_RADIUS = 7;
export const STRIP_HEIGHT = 10;

const OUTCOME_COLORS: Record<string, string> = {
  cycle: "#e6a23c",
  diverged: "#c0392b",
  "derivative-too-small": "#8e44ad",
  "domain-exit": "#7f8c8d",
  "evaluation-fault": "#34495e",
  inconclusive: "#b5a642",
};

// converged samples cycle through a root palette by root index
const ROOT_PALETTE = ["#2e86de", "#27ae60", "#16a085", "#2980b9", "#1abc9c", "#3498db"];

export function basinColor(outcome: string, rootIndex: number | null): string {
  if (outcome === "converged") {
    const idx = rootIndex ?? 0;
    const color = ROOT_PALETTE[idx % ROOT_PALETTE.length];
    return color ?? "#2e86de";
  }
  return OUTCOME_COLORS[outcome] ?? "#999999";
}

function drawArrowhead(
  ctx: CanvasRenderingContext2D,
  x1: number,
  y1: number,
  x2: number,
  y2: number,
): void {
  const angle = Math.atan2(y2 - y1, x2 - x1);
  const size = 8;
  ctx.beginPath();
  ctx.moveTo(x2, y2);
  ctx.lineTo(x2 - size * Math.cos(angle - Math.PI / 7), y2 - size * Math.sin(angle - Math.PI / 7));
  ctx.lineTo(x2 - size * Math.cos(angle + Math.PI / 7), y2 - size * Math.sin(angle + Math.PI / 7));
  ctx.closePath();
  ctx.fill();
}

export function renderScene(
  ctx: CanvasRenderingContext2D,
  state: UiState,
  frame: Frame,
): void {
  const v = state.viewport;
  const px = (x: number) => worldToPx(v, frame, x);
  const py = (y: number) => worldToPy(v, frame, y);

  ctx.clearRect(0, 0, frame.width, frame.height);
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, frame.width, frame.height);

  ctx.save();
  if (state.stale) ctx.globalAlpha = 0.45;

  // axes
  ctx.strokeStyle = "#b0b0b0";
  ctx.lineWidth = 1;
  if (v.ymin <= 0 && 0 <= v.ymax) {
    ctx.beginPath();
    ctx.moveTo(px(v.xmin), py(0));
    ctx.lineTo(px(v.xmax), py(0));
    ctx.stroke();
  }
  if (v.xmin <= 0 && 0 <= v.xmax) {
    ctx.beginPath();
    ctx.moveTo(px(0), py(v.ymin));
    ctx.lineTo(px(0), py(v.ymax));
    ctx.stroke();
  }

  const scene = state.scene;
  if (scene) {
    // graph pieces
    ctx.strokeStyle = "#1f6fb4";
    ctx.lineWidth = 2;
    for (const piece of scene.graph_polyline) {
      if (piece.length < 2) continue;
      ctx.beginPath();
      const first = piece[0];
      if (!first) continue;
      ctx.moveTo(px(first[0]), py(first[1]));
      for (const [x, y] of piece.slice(1)) ctx.lineTo(px(x), py(y));
      ctx.stroke();
    }

    // vertical drops: dashed
    ctx.strokeStyle = "#666666";
    ctx.lineWidth = 1;
    ctx.setLineDash([5, 4]);
    for (const [[x1, y1], [x2, y2]] of scene.vertical_segments) {
      ctx.beginPath();
      ctx.moveTo(px(x1), py(y1));
      ctx.lineTo(px(x2), py(y2));
      ctx.stroke();
    }
    ctx.setLineDash([]);

    // tangents: solid with arrowheads
    ctx.strokeStyle = "#111111";
    ctx.fillStyle = "#111111";
    ctx.lineWidth = 1.4;
    for (const [[x1, y1], [x2, y2]] of scene.tangent_segments) {
      ctx.beginPath();
      ctx.moveTo(px(x1), py(y1));
      ctx.lineTo(px(x2), py(y2));
      ctx.stroke();
      drawArrowhead(ctx, px(x1), py(y1), px(x2), py(y2));
    }

    // iterate markers
    ctx.fillStyle = "#e0218a";
    for (const [x, y] of scene.axis_points) {
      ctx.beginPath();
      ctx.arc(px(x), py(y), 3, 0, 2 * Math.PI);
      ctx.fill();
    }
    for (const [x, y] of scene.graph_points) {
      ctx.beginPath();
      ctx.arc(px(x), py(y), 2.2, 0, 2 * Math.PI);
      ctx.fill();
    }

    // annotation block
    ctx.fillStyle = "#222222";
    ctx.font = "12px monospace";
    const a = scene.annotation;
    const lines = [
      `f(x) = ${a.function}`,
      `x0 = ${a.x0}`,
      `iterations = ${a.iterations}`,
      `x_k = ${a.x_k}`,
      `f(x_k) = ${a.f_x_k === null ? "undefined" : a.f_x_k}`,
    ];
    lines.forEach((line, i) => ctx.fillText(line, frame.margin + 4, frame.margin + 14 + i * 15));
  }
  ctx.restore();

  // basin strip under the x-axis edge (drawn at full alpha; it has its own
  // freshness lifecycle)
  if (state.basinVisible && state.basin) {
    drawBasinStrip(ctx, state.basin, v, frame);
  }

  // draggable start handle (optimistic: always at the *current* x0)
  const hx = px(state.x0);
  const hy = py(0);
  ctx.beginPath();
  ctx.arc(hx, hy, HANDLE_RADIUS, 0, 2 * Math.PI);
  ctx.fillStyle = state.pending ? "#f5b7d0" : "#e0218a";
  ctx.fill();
  ctx.strokeStyle = "#8a0f52";
  ctx.lineWidth = 1.5;
  ctx.stroke();
  ctx.fillStyle = "#8a0f52";
  ctx.font = "12px sans-serif";
  ctx.fillText("X0", hx + 9, hy - 9);
}

function drawBasinStrip(
  ctx: CanvasRenderingContext2D,
  basin: BasinJson,
  v: Viewport,
  frame: Frame,
): void {
  const stripTop = frame.height - frame.margin - STRIP_HEIGHT;
  const [a, b] = basin.interval;
  const n = basin.samples.length;
  if (n === 0) return;
  const cellWorld = (b - a) / Math.max(1, basin.n);
  for (const sample of basin.samples) {
    const x1 = worldToPx(v, frame, sample.x0 - cellWorld / 2);
    const x2 = worldToPx(v, frame, sample.x0 + cellWorld / 2);
    ctx.fillStyle = basinColor(sample.outcome, sample.root_index);
    ctx.fillRect(x1, stripTop, Math.max(1, x2 - x1), STRIP_HEIGHT);
  }
  ctx.strokeStyle = "#444444";
  ctx.lineWidth = 0.5;
  ctx.strokeRect(
    worldToPx(v, frame, a),
    stripTop,
    worldToPx(v, frame, b) - worldToPx(v, frame, a),
    STRIP_HEIGHT,
  );
}

export function isOnBasinStrip(frame: Frame, pyPixel: number): boolean {
  const stripTop = frame.height - frame.margin - STRIP_HEIGHT;
  return pyPixel >= stripTop && pyPixel <= stripTop + STRIP_HEIGHT;
}

export function isOnHandle(
  v: Viewport,
  frame: Frame,
  x0: number,
  pxPixel: number,
  pyPixel: number,
): boolean {
  const hx = worldToPx(v, frame, x0);
  const hy = worldToPy(v, frame, 0);
  const dx = pxPixel - hx;
  const dy = pyPixel - hy;
  return dx * dx + dy * dy <= (HANDLE_RADIUS + 4) ** 2;
}
