import Papa from "papaparse";

import { SchemaMismatchError } from "./errors.js";

export type FigureTag = "FIG1" | "FIG2" | "FIG3" | "FIG4";

/** Column layout of each figure's input CSV, as written by the
 * experiment CLI. Columns listed under `strings` carry categorical
 * values; every other column must parse as a number, with the literal
 * `inf` mapping to `Infinity`. */
export const SCHEMAS: Record<
  FigureTag,
  { columns: readonly string[]; strings: readonly string[] }
> = {
  FIG1: { columns: ["run", "u", "g_true", "g_hat", "band_halfwidth"], strings: [] },
  FIG2: {
    columns: ["run", "c_theta", "lhs", "beta_thm2", "beta_existing"],
    strings: [],
  },
  FIG3: {
    columns: ["delta", "method", "n_runs", "n_violations", "rate"],
    strings: ["method"],
  },
  FIG4: { columns: ["t", "method", "lhs", "rhs"], strings: ["method"] },
};

export type Row = Record<string, number | string>;

function parseCell(column: string, raw: string, strings: readonly string[]): number | string {
  if (strings.includes(column)) {
    return raw;
  }
  if (raw === "inf") {
    return Infinity;
  }
  const value = Number(raw);
  if (raw.trim() === "" || Number.isNaN(value)) {
    throw new SchemaMismatchError(`cell "${raw}" in column ${column} is not numeric`);
  }
  return value;
}

/** Parse CSV text against a figure's schema. The header must match the
 * schema's column list exactly and at least one data row must follow. */
export function parseFigureCsv(text: string, figure: FigureTag): Row[] {
  const schema = SCHEMAS[figure];
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaMismatchError(`CSV parse error: ${parsed.errors[0].message}`);
  }
  const [header, ...body] = parsed.data;
  if (!header || header.join(",") !== schema.columns.join(",")) {
    throw new SchemaMismatchError(
      `expected columns ${schema.columns.join(",")}, got ${header?.join(",") ?? "<none>"}`,
    );
  }
  if (body.length === 0) {
    throw new SchemaMismatchError(`no data rows for ${figure}`);
  }
  return body.map((cells, i) => {
    if (cells.length !== schema.columns.length) {
      throw new SchemaMismatchError(`row ${i + 1} has ${cells.length} cells`);
    }
    const row: Row = {};
    schema.columns.forEach((col, j) => {
      row[col] = parseCell(col, cells[j], schema.strings);
    });
    return row;
  });
}
