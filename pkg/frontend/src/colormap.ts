/** Perceptually ordered colormap (fixed anchor interpolation). */

const ANCHORS: Array<[number, number, number]> = [
  [68, 1, 84],
  [59, 82, 139],
  [33, 145, 140],
  [94, 201, 98],
  [253, 231, 37],
];

function hex(rgb: [number, number, number]): string {
  return (
    "#" + rgb.map((c) => Math.round(c).toString(16).padStart(2, "0")).join("")
  );
}

/** Map u in [0, 1] to a hex color. */
export function colormap(u: number): string {
  const t = Math.min(1, Math.max(0, u)) * (ANCHORS.length - 1);
  const i = Math.min(ANCHORS.length - 2, Math.floor(t));
  const w = t - i;
  const a = ANCHORS[i];
  const b = ANCHORS[i + 1];
  return hex([
    a[0] + w * (b[0] - a[0]),
    a[1] + w * (b[1] - a[1]),
    a[2] + w * (b[2] - a[2]),
  ]);
}

export const LINE_PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
];
