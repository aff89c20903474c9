#!/usr/bin/env node
/** Figure renderer: `render --figure fig3 --in fig3.csv --out fig3.svg`. */

import { parseArgs } from "node:util";

import { MissingFileError, SchemaMismatchError } from "./errors.js";
import { renderFile } from "./render.js";
import { FigureTag, SCHEMAS } from "./schema.js";

const USAGE =
  "usage: snmbounds-render render --figure fig1|fig2|fig3|fig4 --in <csv> --out <svg>";

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        figure: { type: "string" },
        in: { type: "string" },
        out: { type: "string" },
      },
    });
  } catch (err) {
    console.error(`error: ${(err as Error).message}\n${USAGE}`);
    return 2;
  }
  const { positionals, values } = parsed;
  if (positionals.length !== 1 || positionals[0] !== "render") {
    console.error(USAGE);
    return 2;
  }
  const figure = (values.figure ?? "").toUpperCase() as FigureTag;
  if (!(figure in SCHEMAS) || !values.in || !values.out) {
    console.error(USAGE);
    return 2;
  }
  try {
    renderFile({ figure, inputCsv: values.in, output: values.out });
  } catch (err) {
    if (err instanceof MissingFileError || err instanceof SchemaMismatchError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  console.log(`${figure}: ${values.in} -> ${values.out}`);
  return 0;
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
