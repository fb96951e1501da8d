/**
 * Minimal CSV handling for the thirdq figure datasets.
 *
 * The producer emits plain comma-separated numeric/text cells with a
 * mandatory header row and no quoting, so no general CSV machinery is
 * needed here.
 */

export interface Table {
  columns: string[];
  rows: string[][];
}

export class SchemaError extends Error {
  constructor(expected: string[], found: string[]) {
    const missing = expected.filter((c) => !found.includes(c));
    const extra = found.filter((c) => !expected.includes(c));
    super(
      `column mismatch: expected [${expected.join(", ")}], ` +
        `found [${found.join(", ")}]` +
        (missing.length ? `; missing: ${missing.join(", ")}` : "") +
        (extra.length ? `; unexpected: ${extra.join(", ")}` : ""),
    );
    this.name = "SchemaError";
  }
}

export function parseCsv(text: string): Table {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error("empty data file");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  const bad = rows.findIndex((r) => r.length !== columns.length);
  if (bad >= 0) {
    throw new Error(
      `row ${bad + 2} has ${rows[bad].length} cells, expected ${columns.length}`,
    );
  }
  if (rows.length === 0) {
    throw new Error("data file has a header but no rows");
  }
  return { columns, rows };
}

/** Validate the header against the expected schema for a figure id. */
export function requireColumns(table: Table, expected: string[]): void {
  const same =
    table.columns.length === expected.length &&
    expected.every((c, i) => table.columns[i] === c);
  if (!same) {
    throw new SchemaError(expected, table.columns);
  }
}

export function column(table: Table, name: string): string[] {
  const i = table.columns.indexOf(name);
  if (i < 0) {
    throw new SchemaError([name], table.columns);
  }
  return table.rows.map((r) => r[i]);
}

export function numericColumn(table: Table, name: string): number[] {
  return column(table, name).map((v, k) => {
    const x = Number(v);
    if (!Number.isFinite(x)) {
      throw new Error(`non-numeric value "${v}" in column ${name}, row ${k + 2}`);
    }
    return x;
  });
}
