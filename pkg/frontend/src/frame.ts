/** Shared plot-frame helpers: border, ticks, labels. */
import { formatTick, linearTicks, Scale } from "./axes.js";
import { Scene } from "./scene.js";

export interface Frame {
  x0: number;
  y0: number;
  w: number;
  h: number;
}

export const AXIS_COLOR = "#444444";
export const GRID_COLOR = "#dddddd";

export function drawFrameBox(scene: Scene, f: Frame): void {
  scene.items.push({ kind: "rect", x: f.x0, y: f.y0, w: f.w, h: f.h,
                     fill: "#ffffff", stroke: AXIS_COLOR });
}

export function drawXTicks(scene: Scene, f: Frame, scale: Scale,
                           ticks: number[], label: (v: number) => string): void {
  for (const v of ticks) {
    const x = scale(v);
    if (x < f.x0 - 0.5 || x > f.x0 + f.w + 0.5) continue;
    scene.items.push({ kind: "line", x1: x, y1: f.y0, x2: x, y2: f.y0 + f.h,
                       stroke: GRID_COLOR });
    scene.items.push({ kind: "line", x1: x, y1: f.y0 + f.h, x2: x,
                       y2: f.y0 + f.h + 4, stroke: AXIS_COLOR });
    scene.items.push({ kind: "text", x, y: f.y0 + f.h + 16, text: label(v),
                       size: 10, anchor: "middle" });
  }
}

export function drawYTicks(scene: Scene, f: Frame, scale: Scale,
                           ticks: number[], label: (v: number) => string): void {
  for (const v of ticks) {
    const y = scale(v);
    if (y < f.y0 - 0.5 || y > f.y0 + f.h + 0.5) continue;
    scene.items.push({ kind: "line", x1: f.x0, y1: y, x2: f.x0 + f.w, y2: y,
                       stroke: GRID_COLOR });
    scene.items.push({ kind: "line", x1: f.x0 - 4, y1: y, x2: f.x0, y2: y,
                       stroke: AXIS_COLOR });
    scene.items.push({ kind: "text", x: f.x0 - 7, y: y + 3, text: label(v),
                       size: 10, anchor: "end" });
  }
}

export function drawTitleAndAxisLabels(scene: Scene, f: Frame, title: string,
                                       xLabel: string, yLabel: string): void {
  if (title) {
    scene.items.push({ kind: "text", x: f.x0 + f.w / 2, y: f.y0 - 10,
                       text: title, size: 13, anchor: "middle" });
  }
  scene.items.push({ kind: "text", x: f.x0 + f.w / 2, y: f.y0 + f.h + 34,
                     text: xLabel, size: 11, anchor: "middle" });
  scene.items.push({ kind: "text", x: f.x0 - 8, y: f.y0 - 8, text: yLabel,
                     size: 11, anchor: "start" });
}

export function padDomain(lo: number, hi: number, pad = 0.06): [number, number] {
  if (!(hi > lo)) {
    const eps = Math.abs(lo) > 0 ? Math.abs(lo) * 0.5 : 1.0;
    return [lo - eps, hi + eps];
  }
  const span = hi - lo;
  return [lo - pad * span, hi + pad * span];
}

export { formatTick, linearTicks };
