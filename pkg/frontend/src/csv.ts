/** CSV ingestion for the solver's artifact schemas (plain values, no quoting). */

export interface Table {
  columns: string[];
  rows: string[][];
}

export class SchemaError extends Error {}

export function parseCsv(text: string): Table {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) throw new SchemaError("csv: file is empty");
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line, k) => {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(
        `csv: row ${k + 1} has ${cells.length} cells, expected ${columns.length}`,
      );
    }
    return cells;
  });
  return { columns, rows };
}

export function requireColumns(table: Table, names: string[]): void {
  for (const name of names) {
    if (!table.columns.includes(name)) {
      throw new SchemaError(`csv: missing column '${name}'`);
    }
  }
}

export function columnIndex(table: Table, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) throw new SchemaError(`csv: missing column '${name}'`);
  return idx;
}

export function numericColumn(table: Table, name: string): number[] {
  const idx = columnIndex(table, name);
  return table.rows.map((row, k) => {
    const v = Number(row[idx]);
    if (Number.isNaN(v) && row[idx] !== "nan") {
      throw new SchemaError(`csv: row ${k + 1}, column '${name}': not a number (${row[idx]})`);
    }
    return v;
  });
}

/** Matching column names like y1, y2 / lambda_1, lambda_2, in index order. */
export function indexedColumns(table: Table, pattern: RegExp): string[] {
  const found = table.columns
    .map((c) => ({ c, m: pattern.exec(c) }))
    .filter((e) => e.m !== null)
    .map((e) => ({ name: e.c, index: Number(e.m![1]) }));
  found.sort((a, b) => a.index - b.index);
  found.forEach((e, k) => {
    if (e.index !== k + 1) {
      throw new SchemaError(`csv: indexed columns are not contiguous near '${e.name}'`);
    }
  });
  return found.map((e) => e.name);
}
