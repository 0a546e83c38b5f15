/** Log-log convergence figure: error against maturity, fitted power law,
 * slope annotation recomputed from the rows being drawn. */
import { formatLogTick, linearScale, logTicks } from "./axes.js";
import { numericColumn, parseCsv, requireColumns, SchemaError, Table } from "./csv.js";
import { drawFrameBox, drawTitleAndAxisLabels, drawXTicks, drawYTicks,
         Frame, padDomain } from "./frame.js";
import { fitLogLog } from "./ols.js";
import { makeScene, Scene } from "./scene.js";

export interface ConvergenceOptions {
  refSlope?: number;
  title?: string;
}

export interface ConvergenceFigure {
  scene: Scene;
  slope: number;
  intercept: number;
  annotation: string;
  pointsDrawn: number;
}

const COLUMNS = ["T", "t_policy", "l1_error", "slope_running"];

function validate(table: Table): void {
  requireColumns(table, COLUMNS);
  for (const c of table.columns) {
    if (!COLUMNS.includes(c)) {
      throw new SchemaError(`csv: unexpected column '${c}' for a convergence file`);
    }
  }
  if (table.rows.length === 0) {
    throw new SchemaError("convergence: no data rows");
  }
}

export function buildConvergence(csvText: string,
                                 opts: ConvergenceOptions = {}): ConvergenceFigure {
  const table = parseCsv(csvText);
  validate(table);
  const maturities = numericColumn(table, "T");
  const errors = numericColumn(table, "l1_error");

  const fit = fitLogLog(maturities, errors);
  const kept: Array<[number, number]> = [];
  for (let i = 0; i < maturities.length; i++) {
    if (errors[i] > 0 && Number.isFinite(errors[i])) {
      kept.push([Math.log10(maturities[i]), Math.log10(errors[i])]);
    }
  }

  const scene = makeScene(640, 480);
  const frame: Frame = { x0: 80, y0: 48, w: 512, h: 360 };
  const xs = kept.map((p) => p[0]);
  const ys = kept.map((p) => p[1]);
  const xDom = padDomain(Math.min(...xs), Math.max(...xs));
  const yDom = padDomain(Math.min(...ys), Math.max(...ys));
  const sx = linearScale(xDom, [frame.x0, frame.x0 + frame.w]);
  const sy = linearScale(yDom, [frame.y0 + frame.h, frame.y0]);

  drawFrameBox(scene, frame);
  drawXTicks(scene, frame, sx, logTicks(xDom[0], xDom[1]), formatLogTick);
  drawYTicks(scene, frame, sy, logTicks(yDom[0], yDom[1]), formatLogTick);
  drawTitleAndAxisLabels(scene, frame, opts.title ?? "approximation error vs maturity",
                         "maturity t (log)", "l1 error (log)");

  // fitted line in log10 coordinates: log10 e = (intercept + slope ln T)/ln 10
  const ln10 = Math.log(10);
  const lineY = (x10: number) => (fit.intercept + fit.slope * x10 * ln10) / ln10;
  scene.items.push({
    kind: "polyline",
    points: [[sx(xDom[0]), sy(lineY(xDom[0]))], [sx(xDom[1]), sy(lineY(xDom[1]))]],
    stroke: "#d62728",
    width: 2,
  });

  if (opts.refSlope !== undefined) {
    // reference-slope line through the centroid of the kept points
    const cx = xs.reduce((a, b) => a + b, 0) / xs.length;
    const cy = ys.reduce((a, b) => a + b, 0) / ys.length;
    const refY = (x10: number) => cy + opts.refSlope! * (x10 - cx);
    scene.items.push({
      kind: "polyline",
      points: [[sx(xDom[0]), sy(refY(xDom[0]))], [sx(xDom[1]), sy(refY(xDom[1]))]],
      stroke: "#2ca02c",
      width: 1,
      dash: true,
    });
  }

  for (const [x10, y10] of kept) {
    scene.items.push({ kind: "circle", cx: sx(x10), cy: sy(y10), r: 4,
                       fill: "#1f77b4" });
  }

  const annotation = `slope = ${fit.slope.toFixed(6)}`;
  scene.items.push({ kind: "text", x: frame.x0 + 12, y: frame.y0 + 22,
                     text: annotation, size: 13 });
  if (opts.refSlope !== undefined) {
    scene.items.push({ kind: "text", x: frame.x0 + 12, y: frame.y0 + 40,
                       text: `ref slope = ${opts.refSlope}`, size: 11,
                       fill: "#2ca02c" });
  }

  return { scene, slope: fit.slope, intercept: fit.intercept, annotation,
           pointsDrawn: kept.length };
}
