/** Ordinary least squares on (log T, log error); the figure recomputes the
 * slope from the CSV it draws rather than trusting any upstream summary. */

export interface LogLogFit {
  slope: number;
  intercept: number;
  kept: number;
}

export function olsFit(x: number[], y: number[]): { slope: number; intercept: number } {
  const n = x.length;
  const mx = x.reduce((a, b) => a + b, 0) / n;
  const my = y.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx === 0) throw new Error("ols: degenerate abscissa (all maturities equal)");
  const slope = sxy / sxx;
  return { slope, intercept: my - slope * mx };
}

export function fitLogLog(maturities: number[], errors: number[]): LogLogFit {
  const xs: number[] = [];
  const ys: number[] = [];
  const droppedRows: number[] = [];
  for (let i = 0; i < maturities.length; i++) {
    if (errors[i] > 0 && Number.isFinite(errors[i]) && maturities[i] > 0) {
      xs.push(Math.log(maturities[i]));
      ys.push(Math.log(errors[i]));
    } else {
      droppedRows.push(i + 1);
    }
  }
  if (xs.length < 2) {
    throw new Error(
      `ols: fewer than 2 usable rows (dropped rows: ${droppedRows.join(", ") || "none"})`,
    );
  }
  const { slope, intercept } = olsFit(xs, ys);
  return { slope, intercept, kept: xs.length };
}
