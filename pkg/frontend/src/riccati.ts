/** Coefficient-path panels: alpha, beta components, and gamma components
 * against time-to-maturity, one line style per investor/component, with a
 * vertical marker at the reported explosion time when present. */
import { formatTick, linearScale, linearTicks } from "./axes.js";
import { columnIndex, indexedColumns, parseCsv, requireColumns, SchemaError,
         Table } from "./csv.js";
import { LINE_PALETTE } from "./colormap.js";
import { drawFrameBox, drawXTicks, drawYTicks, Frame, padDomain } from "./frame.js";
import { makeScene, Scene } from "./scene.js";

export interface RiccatiOptions {
  title?: string;
}

export interface RiccatiFigure {
  scene: Scene;
  investors: number[];
  dim: number;
  blowUp: number | null;
}

interface Series {
  label: string;
  color: string;
  dash: boolean;
  points: Array<[number, number]>; // (s, value)
}

export function buildRiccati(csvText: string, opts: RiccatiOptions = {}): RiccatiFigure {
  const table = parseCsv(csvText);
  requireColumns(table, ["s", "investor", "alpha", "blow_up", "beta_1", "gamma_11"]);
  const betaCols = indexedColumns(table, /^beta_(\d+)$/);
  const D = betaCols.length;
  const gammaCols: string[] = [];
  for (let d = 1; d <= D; d++) {
    for (let e = 1; e <= D; e++) gammaCols.push(`gamma_${d}${e}`);
  }
  const expected = new Set(["s", "investor", "alpha", "blow_up", ...betaCols,
                            ...gammaCols]);
  for (const c of table.columns) {
    if (!expected.has(c)) {
      throw new SchemaError(`csv: unexpected column '${c}' for a coefficient-path file`);
    }
  }
  requireColumns(table, gammaCols);
  if (table.rows.length === 0) throw new SchemaError("riccati: no data rows");

  const sIdx = columnIndex(table, "s");
  const invIdx = columnIndex(table, "investor");
  const blowIdx = columnIndex(table, "blow_up");
  const investors = [...new Set(table.rows.map((r) => Number(r[invIdx])))]
    .sort((a, b) => a - b);
  let blowUp: number | null = null;
  for (const r of table.rows) {
    if (r[blowIdx] !== "") {
      blowUp = Number(r[blowIdx]);
      break;
    }
  }

  const byInvestor = new Map<number, Array<string[]>>();
  for (const inv of investors) byInvestor.set(inv, []);
  for (const r of table.rows) byInvestor.get(Number(r[invIdx]))!.push(r);

  function seriesFor(column: string, dashByIndex: number): Series[] {
    const idx = columnIndex(table, column);
    return investors.map((inv) => ({
      label: `inv ${inv} ${column}`,
      color: LINE_PALETTE[inv % LINE_PALETTE.length],
      dash: dashByIndex > 0,
      points: byInvestor.get(inv)!
        .map((r) => [Number(r[sIdx]), Number(r[idx])] as [number, number])
        .sort((a, b) => a[0] - b[0]),
    }));
  }

  const panels: Array<{ name: string; series: Series[] }> = [
    { name: "alpha", series: seriesFor("alpha", 0) },
    { name: "beta", series: betaCols.flatMap((c, k) => seriesFor(c, k)) },
    { name: "gamma", series: gammaCols.flatMap((c, k) => seriesFor(c, k)) },
  ];

  const scene = makeScene(960, 420);
  const panelW = 260;
  const panelH = 280;
  const gap = 56;
  panels.forEach((panel, p) => {
    const frame: Frame = { x0: 64 + p * (panelW + gap), y0: 64, w: panelW, h: panelH };
    const allS = panel.series.flatMap((s) => s.points.map((q) => q[0]));
    const allV = panel.series.flatMap((s) => s.points.map((q) => q[1]));
    const xDom: [number, number] = [Math.min(...allS), Math.max(...allS)];
    const yDom = padDomain(Math.min(...allV), Math.max(...allV));
    const sx = linearScale(xDom[1] > xDom[0] ? xDom : [xDom[0], xDom[0] + 1],
                           [frame.x0, frame.x0 + frame.w]);
    const sy = linearScale(yDom, [frame.y0 + frame.h, frame.y0]);
    drawFrameBox(scene, frame);
    drawXTicks(scene, frame, sx, linearTicks(xDom[0], xDom[1], 4), formatTick);
    drawYTicks(scene, frame, sy, linearTicks(yDom[0], yDom[1], 5), formatTick);
    scene.items.push({ kind: "text", x: frame.x0 + frame.w / 2, y: frame.y0 - 10,
                       text: panel.name, size: 12, anchor: "middle" });
    scene.items.push({ kind: "text", x: frame.x0 + frame.w / 2,
                       y: frame.y0 + frame.h + 32, text: "time to maturity s",
                       size: 10, anchor: "middle" });
    for (const s of panel.series) {
      scene.items.push({
        kind: "polyline",
        points: s.points.map(([sv, v]) => [sx(sv), sy(v)] as [number, number]),
        stroke: s.color,
        width: 1,
        dash: s.dash,
      });
    }
    if (blowUp !== null && blowUp >= xDom[0] && blowUp <= xDom[1] + 1e-12) {
      const x = sx(blowUp);
      scene.items.push({ kind: "line", x1: x, y1: frame.y0, x2: x,
                         y2: frame.y0 + frame.h, stroke: "#d62728", dash: true,
                         width: 2 });
    }
  });

  const title = opts.title ?? (blowUp !== null
    ? `coefficient paths (blow-up at s = ${formatTick(blowUp)})`
    : "coefficient paths");
  scene.items.push({ kind: "text", x: 480, y: 24, text: title, size: 13,
                     anchor: "middle" });
  investors.forEach((inv, k) => {
    const x = 64 + k * 110;
    scene.items.push({ kind: "line", x1: x, y1: 40, x2: x + 22, y2: 40,
                       stroke: LINE_PALETTE[inv % LINE_PALETTE.length], width: 2 });
    scene.items.push({ kind: "text", x: x + 28, y: 44, text: `investor ${inv}`,
                       size: 10 });
  });

  return { scene, investors, dim: D, blowUp };
}
