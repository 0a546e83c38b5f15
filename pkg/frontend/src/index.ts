import { readFileSync, writeFileSync } from "node:fs";
import { extname } from "node:path";

import { buildConvergence, ConvergenceOptions } from "./convergence.js";
import { buildRiccati, RiccatiOptions } from "./riccati.js";
import { sceneToPng } from "./raster.js";
import { Scene } from "./scene.js";
import { buildSurface, SurfaceOptions } from "./surface.js";
import { sceneToSvg } from "./svg.js";

export { buildConvergence } from "./convergence.js";
export { buildSurface } from "./surface.js";
export { buildRiccati } from "./riccati.js";
export { sceneToSvg } from "./svg.js";
export { sceneToPng } from "./raster.js";
export { fitLogLog, olsFit } from "./ols.js";
export { parseCsv, SchemaError } from "./csv.js";

export type FigureKind = "convergence" | "surface" | "riccati";

export interface RenderResult {
  outPath: string;
  format: "svg" | "png";
  meta: Record<string, unknown>;
}

export function writeScene(scene: Scene, outPath: string): "svg" | "png" {
  const ext = extname(outPath).toLowerCase();
  if (ext === ".svg") {
    writeFileSync(outPath, sceneToSvg(scene), "utf-8");
    return "svg";
  }
  if (ext === ".png") {
    writeFileSync(outPath, sceneToPng(scene));
    return "png";
  }
  throw new Error(`output format not recognized from extension '${ext}' (use .svg or .png)`);
}

export function renderConvergence(csvPath: string, outPath: string,
                                  opts: ConvergenceOptions = {}): RenderResult {
  const fig = buildConvergence(readFileSync(csvPath, "utf-8"), opts);
  const format = writeScene(fig.scene, outPath);
  return { outPath, format,
           meta: { slope: fig.slope, intercept: fig.intercept,
                   annotation: fig.annotation, points: fig.pointsDrawn } };
}

export function renderSurface(csvPath: string, outPath: string,
                              opts: SurfaceOptions = {}): RenderResult {
  const fig = buildSurface(readFileSync(csvPath, "utf-8"), opts);
  const format = writeScene(fig.scene, outPath);
  return { outPath, format,
           meta: { vmin: fig.vmin, vmax: fig.vmax, ...fig.dims,
                   slice: fig.sliceDescription } };
}

export function renderRiccati(csvPath: string, outPath: string,
                              opts: RiccatiOptions = {}): RenderResult {
  const fig = buildRiccati(readFileSync(csvPath, "utf-8"), opts);
  const format = writeScene(fig.scene, outPath);
  return { outPath, format,
           meta: { investors: fig.investors, dim: fig.dim, blowUp: fig.blowUp } };
}

export function renderFigure(kind: FigureKind, csvPath: string, outPath: string,
                             opts: Record<string, unknown> = {}): RenderResult {
  switch (kind) {
    case "convergence":
      return renderConvergence(csvPath, outPath, opts as ConvergenceOptions);
    case "surface":
      return renderSurface(csvPath, outPath, opts as SurfaceOptions);
    case "riccati":
      return renderRiccati(csvPath, outPath, opts as RiccatiOptions);
    default:
      throw new Error(`unknown figure kind '${kind}'`);
  }
}
