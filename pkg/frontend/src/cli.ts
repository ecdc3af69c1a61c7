#!/usr/bin/env node
/**
 * znkmc-render --kind <single_pair|beta_scaling|size_scaling>
 *              --in <csv> [--in <csv> ...] [--fits <fit.json>] --out <img.(svg|png)>
 */

import { FigureKind } from "./figures";
import { SchemaError } from "./schemas";
import { FigureJob, renderToFile } from "./render";

const KINDS = new Set(["single_pair", "beta_scaling", "size_scaling"]);

export function parseArgs(argv: string[]): FigureJob {
  let kind: string | undefined;
  let fits: string | undefined;
  let out: string | undefined;
  const inputs: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new SchemaError(`${arg} needs a value`);
      return argv[++i];
    };
    switch (arg) {
      case "--kind":
        kind = next();
        break;
      case "--in":
        inputs.push(next());
        break;
      case "--fits":
        fits = next();
        break;
      case "--out":
        out = next();
        break;
      default:
        throw new SchemaError(`unknown argument '${arg}'`);
    }
  }
  if (!kind || !KINDS.has(kind)) {
    throw new SchemaError(`--kind must be one of ${[...KINDS].join(", ")}`);
  }
  if (!out) {
    throw new SchemaError("--out is required");
  }
  return { kind: kind as FigureKind, inputs, fits, out };
}

export function main(argv: string[]): number {
  try {
    const written = renderToFile(parseArgs(argv));
    process.stdout.write(written + "\n");
    return 0;
  } catch (e) {
    if (e instanceof SchemaError) {
      process.stderr.write(`schema error: ${e.message}\n`);
      return 1;
    }
    process.stderr.write(`error: ${(e as Error).message}\n`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
