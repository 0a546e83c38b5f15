/** Heatmap of one market-price-of-risk component over (t, y1), with slice
 * selection for higher-dimensional factors. */
import { formatTick, linearScale, linearTicks } from "./axes.js";
import { colormap } from "./colormap.js";
import { columnIndex, indexedColumns, numericColumn, parseCsv, requireColumns,
         SchemaError, Table } from "./csv.js";
import { drawTitleAndAxisLabels, Frame } from "./frame.js";
import { makeScene, Scene } from "./scene.js";

export interface SurfaceOptions {
  component?: number;            // 1-based lambda component
  slices?: Record<string, number>; // e.g. { y2: 0.0 } for D >= 2
  title?: string;
}

export interface SurfaceFigure {
  scene: Scene;
  vmin: number;
  vmax: number;
  dims: { D: number; N: number; nt: number; ny: number };
  sliceDescription: string;
}

function uniqueSorted(values: string[]): string[] {
  const seen = new Set<string>();
  const out: string[] = [];
  for (const v of values) {
    if (!seen.has(v)) {
      seen.add(v);
      out.push(v);
    }
  }
  return out.sort((a, b) => Number(a) - Number(b));
}

export function buildSurface(csvText: string, opts: SurfaceOptions = {}): SurfaceFigure {
  const table = parseCsv(csvText);
  requireColumns(table, ["t", "r", "y1", "lambda_1"]);
  const yCols = indexedColumns(table, /^y(\d+)$/);
  const lambdaCols = indexedColumns(table, /^lambda_(\d+)$/);
  const expected = new Set(["t", "r", ...yCols, ...lambdaCols]);
  for (const c of table.columns) {
    if (!expected.has(c)) {
      throw new SchemaError(`csv: unexpected column '${c}' for a surface file`);
    }
  }
  const D = yCols.length;
  const N = lambdaCols.length;
  const component = opts.component ?? 1;
  if (component < 1 || component > N) {
    throw new SchemaError(`surface: component ${component} outside 1..${N}`);
  }
  if (table.rows.length === 0) throw new SchemaError("surface: no data rows");

  // Fix a slice value for every factor axis beyond the first.
  let rows = table.rows;
  const sliceParts: string[] = [];
  for (let d = 2; d <= D; d++) {
    const name = `y${d}`;
    const idx = columnIndex(table, name);
    const uniq = uniqueSorted(rows.map((r) => r[idx]));
    let chosen: string;
    if (opts.slices && name in opts.slices) {
      const want = opts.slices[name];
      chosen = uniq.reduce((best, v) =>
        Math.abs(Number(v) - want) < Math.abs(Number(best) - want) ? v : best);
    } else {
      chosen = uniq[Math.floor((uniq.length - 1) / 2)];
    }
    rows = rows.filter((r) => r[idx] === chosen);
    sliceParts.push(`${name}=${formatTick(Number(chosen))}`);
  }

  const tIdx = columnIndex(table, "t");
  const yIdx = columnIndex(table, "y1");
  const vIdx = columnIndex(table, `lambda_${component}`);
  const tVals = uniqueSorted(rows.map((r) => r[tIdx]));
  const yVals = uniqueSorted(rows.map((r) => r[yIdx]));
  const nt = tVals.length;
  const ny = yVals.length;
  const grid: number[][] = Array.from({ length: ny }, () => new Array(nt).fill(NaN));
  const tPos = new Map(tVals.map((v, k) => [v, k]));
  const yPos = new Map(yVals.map((v, k) => [v, k]));
  for (const r of rows) {
    const i = yPos.get(r[yIdx])!;
    const j = tPos.get(r[tIdx])!;
    if (!Number.isNaN(grid[i][j])) {
      throw new SchemaError(
        `surface: duplicate cell at t=${r[tIdx]}, y1=${r[yIdx]} (is a slice missing?)`);
    }
    grid[i][j] = Number(r[vIdx]);
  }
  for (let i = 0; i < ny; i++) {
    for (let j = 0; j < nt; j++) {
      if (Number.isNaN(grid[i][j])) {
        throw new SchemaError(
          `surface: missing cell at t=${tVals[j]}, y1=${yVals[i]}`);
      }
    }
  }

  let vmin = Infinity;
  let vmax = -Infinity;
  for (const row of grid) {
    for (const v of row) {
      vmin = Math.min(vmin, v);
      vmax = Math.max(vmax, v);
    }
  }
  const span = vmax - vmin;

  const scene = makeScene(700, 480);
  const frame: Frame = { x0: 80, y0: 48, w: 480, h: 360 };
  const cellW = frame.w / nt;
  const cellH = frame.h / ny;
  // row 0 at the top corresponds to the largest y1
  const colors = Array.from({ length: ny }, (_, i) =>
    Array.from({ length: nt }, (_, j) => {
      const v = grid[ny - 1 - i][j];
      return colormap(span > 0 ? (v - vmin) / span : 0.5);
    }));
  scene.items.push({ kind: "cells", x: frame.x0, y: frame.y0, cellW, cellH, colors });
  // outline over the cells (a filled frame box would cover them)
  scene.items.push({ kind: "line", x1: frame.x0, y1: frame.y0, x2: frame.x0 + frame.w, y2: frame.y0, stroke: "#444444" });
  scene.items.push({ kind: "line", x1: frame.x0, y1: frame.y0 + frame.h, x2: frame.x0 + frame.w, y2: frame.y0 + frame.h, stroke: "#444444" });
  scene.items.push({ kind: "line", x1: frame.x0, y1: frame.y0, x2: frame.x0, y2: frame.y0 + frame.h, stroke: "#444444" });
  scene.items.push({ kind: "line", x1: frame.x0 + frame.w, y1: frame.y0, x2: frame.x0 + frame.w, y2: frame.y0 + frame.h, stroke: "#444444" });

  const ts = tVals.map(Number);
  const ys = yVals.map(Number);
  const sx = linearScale([ts[0], ts[nt - 1] || ts[0] + 1], [frame.x0 + cellW / 2, frame.x0 + frame.w - cellW / 2]);
  const sy = linearScale([ys[0], ys[ny - 1] || ys[0] + 1], [frame.y0 + frame.h - cellH / 2, frame.y0 + cellH / 2]);
  for (const v of linearTicks(ts[0], ts[nt - 1], 6)) {
    scene.items.push({ kind: "line", x1: sx(v), y1: frame.y0 + frame.h, x2: sx(v), y2: frame.y0 + frame.h + 4, stroke: "#444444" });
    scene.items.push({ kind: "text", x: sx(v), y: frame.y0 + frame.h + 16, text: formatTick(v), size: 10, anchor: "middle" });
  }
  for (const v of linearTicks(ys[0], ys[ny - 1], 6)) {
    scene.items.push({ kind: "line", x1: frame.x0 - 4, y1: sy(v), x2: frame.x0, y2: sy(v), stroke: "#444444" });
    scene.items.push({ kind: "text", x: frame.x0 - 7, y: sy(v) + 3, text: formatTick(v), size: 10, anchor: "end" });
  }
  const sliceDescription = sliceParts.join(", ");
  const title = opts.title ?? `lambda_${component}(t, y1)`
    + (sliceDescription ? ` at ${sliceDescription}` : "");
  drawTitleAndAxisLabels(scene, frame, title, "t", "y1");

  // colorbar
  const cbX = frame.x0 + frame.w + 24;
  const cbH = frame.h;
  const steps = 64;
  const cbColors = Array.from({ length: steps }, (_, i) =>
    [colormap(1 - i / (steps - 1))]);
  scene.items.push({ kind: "cells", x: cbX, y: frame.y0, cellW: 18,
                     cellH: cbH / steps, colors: cbColors });
  scene.items.push({ kind: "text", x: cbX + 24, y: frame.y0 + 10,
                     text: formatTick(vmax), size: 10 });
  scene.items.push({ kind: "text", x: cbX + 24, y: frame.y0 + cbH,
                     text: formatTick(vmin), size: 10 });

  return { scene, vmin, vmax, dims: { D, N, nt, ny }, sliceDescription };
}
