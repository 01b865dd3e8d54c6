/**
 * Reader for mcl CSV output: a `# meta: {...}` JSON line, a header row, and
 * plain numeric data rows (no quoting or embedded commas in this format).
 */

import * as fs from "fs";

export interface CsvTable {
  meta: Record<string, unknown>;
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length < 2 || !lines[0].startsWith("# meta: ")) {
    throw new Error("not an mcl CSV: missing '# meta:' header line");
  }
  let meta: Record<string, unknown>;
  try {
    meta = JSON.parse(lines[0].slice("# meta: ".length));
  } catch (err) {
    throw new Error(`malformed meta header: ${(err as Error).message}`);
  }
  const header = lines[1].split(",");
  const rows = lines.slice(2).map((line) => line.split(","));
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new Error(
        `row has ${row.length} fields, header has ${header.length}`
      );
    }
  }
  return { meta, header, rows };
}

export function loadCsv(path: string): CsvTable {
  return parseCsv(fs.readFileSync(path, "utf-8"));
}

/** Validate that the file came from one of the expected subcommands and
 *  carries every column the plot needs; never guess at columns. */
export function requireSchema(
  table: CsvTable,
  subcommands: string[],
  columns: string[]
): void {
  const sub = String(table.meta["subcommand"] ?? "<missing>");
  if (!subcommands.includes(sub)) {
    throw new Error(
      `schema mismatch: input is '${sub}' output, expected one of: ${subcommands.join(", ")}`
    );
  }
  const missing = columns.filter((c) => !table.header.includes(c));
  if (missing.length > 0) {
    throw new Error(
      `schema mismatch: '${sub}' file is missing column(s): ${missing.join(", ")}`
    );
  }
}

export function column(table: CsvTable, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`no column '${name}' in header [${table.header.join(", ")}]`);
  }
  return table.rows.map((row) => {
    const v = Number(row[idx]);
    if (Number.isNaN(v)) {
      throw new Error(`non-numeric value '${row[idx]}' in column '${name}'`);
    }
    return v;
  });
}

/** Distinct values in first-appearance order (for grouping series). */
export function distinct(values: number[]): number[] {
  const seen = new Set<number>();
  const out: number[] = [];
  for (const v of values) {
    if (!seen.has(v)) {
      seen.add(v);
      out.push(v);
    }
  }
  return out;
}
