#!/usr/bin/env node
/**
 * plots <kind> --csv <path> --out <path> [--ref-slope x] [--component n]
 *       [--slice yD=value] [--title text]
 *
 * kind: convergence | surface | riccati.  Output format follows the
 * extension of --out (.svg vector, .png raster).
 */
import { renderFigure, FigureKind, SchemaError } from "./index.js";

interface Args {
  kind: FigureKind;
  csv: string;
  out: string;
  refSlope?: number;
  component?: number;
  slices: Record<string, number>;
  title?: string;
}

const USAGE =
  "usage: plots <convergence|surface|riccati> --csv <path> --out <path> " +
  "[--ref-slope x] [--component n] [--slice yD=value] [--title text]";

function parseArgs(argv: string[]): Args {
  if (argv.length === 0) throw new Error(USAGE);
  const kind = argv[0] as FigureKind;
  if (!["convergence", "surface", "riccati"].includes(kind)) {
    throw new Error(`unknown kind '${argv[0]}'\n${USAGE}`);
  }
  const args: Args = { kind, csv: "", out: "", slices: {} };
  for (let i = 1; i < argv.length; i++) {
    const flag = argv[i];
    const need = (): string => {
      if (i + 1 >= argv.length) throw new Error(`${flag} needs a value\n${USAGE}`);
      return argv[++i];
    };
    switch (flag) {
      case "--csv":
        args.csv = need();
        break;
      case "--out":
        args.out = need();
        break;
      case "--ref-slope":
        args.refSlope = Number(need());
        if (Number.isNaN(args.refSlope)) throw new Error("--ref-slope must be numeric");
        break;
      case "--component":
        args.component = Number(need());
        break;
      case "--slice": {
        const spec = need();
        const m = /^(y\d+)=(.+)$/.exec(spec);
        if (!m || Number.isNaN(Number(m[2]))) {
          throw new Error(`--slice expects yD=value, got '${spec}'`);
        }
        args.slices[m[1]] = Number(m[2]);
        break;
      }
      case "--title":
        args.title = need();
        break;
      default:
        throw new Error(`unknown flag '${flag}'\n${USAGE}`);
    }
  }
  if (!args.csv || !args.out) throw new Error(`--csv and --out are required\n${USAGE}`);
  return args;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  try {
    const opts: Record<string, unknown> = { title: args.title };
    if (args.kind === "convergence" && args.refSlope !== undefined) {
      opts.refSlope = args.refSlope;
    }
    if (args.kind === "surface") {
      if (args.component !== undefined) opts.component = args.component;
      opts.slices = args.slices;
    }
    const result = renderFigure(args.kind, args.csv, args.out, opts);
    console.log(`${result.outPath} (${result.format}) ${JSON.stringify(result.meta)}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${(err as Error).message}`);
    } else {
      console.error((err as Error).message);
    }
    return 1;
  }
}

const invokedDirectly = process.argv[1] !== undefined
  && import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
