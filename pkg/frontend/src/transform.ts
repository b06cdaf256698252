// Viewport <-> canvas-pixel transforms. This is the only numeric work the
// UI does itself; every other number on screen comes from the service.

export interface Viewport {
  xmin: number;
  xmax: number;
  ymin: number;
  ymax: number;
}

export interface Frame {
  width: number;
  height: number;
  margin: number;
}

export function worldToPx(v: Viewport, f: Frame, x: number): number {
  return f.margin + ((x - v.xmin) / (v.xmax - v.xmin)) * (f.width - 2 * f.margin);
}

export function worldToPy(v: Viewport, f: Frame, y: number): number {
  // canvas y grows downward
  return f.margin + ((v.ymax - y) / (v.ymax - v.ymin)) * (f.height - 2 * f.margin);
}

export function pxToWorldX(v: Viewport, f: Frame, px: number): number {
  return v.xmin + ((px - f.margin) / (f.width - 2 * f.margin)) * (v.xmax - v.xmin);
}

export function pyToWorldY(v: Viewport, f: Frame, py: number): number {
  return v.ymax - ((py - f.margin) / (f.height - 2 * f.margin)) * (v.ymax - v.ymin);
}

export function clampToViewportX(v: Viewport, x: number): number {
  return Math.min(v.xmax, Math.max(v.xmin, x));
}
