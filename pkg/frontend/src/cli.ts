#!/usr/bin/env node
/**
 * mcl-plot <kind> --input data.csv --out figure.svg [--title t] [--value col]
 *                 [--width n] [--height n]
 *
 * kind: heatmap | timeseries | steady-curve | compare | histogram
 * Exit codes: 0 ok, 1 usage error, 2 runtime error.
 */

import * as fs from "fs";
import { loadCsv } from "./csv";
import { PlotKind, PlotOptions, render } from "./plots";

const KINDS = ["heatmap", "timeseries", "steady-curve", "compare", "histogram"];

function usage(msg: string): never {
  process.stderr.write(`mcl-plot: error: ${msg}\n`);
  process.stderr.write(
    "usage: mcl-plot <heatmap|timeseries|steady-curve|compare|histogram> " +
      "--input data.csv --out figure.svg [--title t] [--value col] [--width n] [--height n]\n"
  );
  process.exit(1);
}

export function main(argv: string[]): number {
  const [kind, ...rest] = argv;
  if (!kind || !KINDS.includes(kind)) {
    usage(`expected a plot kind, got '${kind ?? ""}'`);
  }
  const opts: PlotOptions = {};
  let input: string | undefined;
  let out: string | undefined;
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (value === undefined) usage(`flag ${flag} needs a value`);
    switch (flag) {
      case "--input":
        input = value;
        break;
      case "--out":
        out = value;
        break;
      case "--title":
        opts.title = value;
        break;
      case "--value":
        opts.value = value;
        break;
      case "--width":
        opts.width = Number(value);
        break;
      case "--height":
        opts.height = Number(value);
        break;
      default:
        usage(`unknown flag ${flag}`);
    }
  }
  if (!input) usage("--input is required");
  if (!out) usage("--out is required");

  try {
    const svg = render(kind as PlotKind, loadCsv(input), opts);
    fs.writeFileSync(out, svg);
    process.stdout.write(`wrote ${out}\n`);
    return 0;
  } catch (err) {
    process.stderr.write(`mcl-plot: ${(err as Error).message}\n`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
