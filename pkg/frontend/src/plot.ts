#!/usr/bin/env node
/**
 * Figure CLI: reads simulator CSVs, writes one SVG.
 *
 *   plot --kind pcrb-convergence|energy-budget|queue-evolution|pcrb-vs-snr \
 *        --in run1.csv [run2.csv ...] --out figure.svg [--budget 20.0]
 *
 * Record figures consume the fixed records schema; pcrb-vs-snr consumes a
 * sweep summary (snr_db, policy, pcrb_steady_mean[, pcrb_steady_std]).
 * Header-only inputs render empty axes with a warning and still exit 0;
 * schema violations name the missing column and exit 2.
 */

import { readFile, writeFile } from "node:fs/promises";
import { FIGURE_KINDS, FigureKind, figureFor } from "./figures.js";
import { parseRecords, parseSweep, SchemaError, SlotRecord, SweepRow } from "./csv.js";
import { renderChart } from "./svg.js";

interface Args {
  kind: FigureKind;
  inputs: string[];
  out: string;
  budget: number;
}

export function parseArgs(argv: string[]): Args {
  const args: Partial<Args> = { inputs: [], budget: 20.0 };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    switch (flag) {
      case "--kind": {
        const value = argv[++i] as FigureKind;
        if (!FIGURE_KINDS.includes(value)) {
          throw new SchemaError(
            `--kind must be one of ${FIGURE_KINDS.join(", ")}; got '${value}'`,
          );
        }
        args.kind = value;
        break;
      }
      case "--in":
        while (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
          args.inputs!.push(argv[++i]);
        }
        break;
      case "--out":
        args.out = argv[++i];
        break;
      case "--budget":
        args.budget = Number(argv[++i]);
        if (!Number.isFinite(args.budget)) {
          throw new SchemaError("--budget must be a number");
        }
        break;
      default:
        throw new SchemaError(`unknown flag '${flag}'`);
    }
  }
  if (!args.kind) throw new SchemaError("--kind is required");
  if (!args.out) throw new SchemaError("--out is required");
  if (!args.inputs || args.inputs.length === 0) {
    throw new SchemaError("--in requires at least one CSV path");
  }
  return args as Args;
}

export async function run(
  argv: string[],
  warn: (msg: string) => void = (msg) => console.error(msg),
): Promise<number> {
  const args = parseArgs(argv);
  const records: SlotRecord[] = [];
  const sweep: SweepRow[] = [];
  for (const path of args.inputs) {
    const text = await readFile(path, "utf8");
    if (args.kind === "pcrb-vs-snr") {
      sweep.push(...parseSweep(text, ["snr_db", "policy", "pcrb_steady_mean"], path));
    } else {
      records.push(...parseRecords(text, path));
    }
  }
  if (records.length === 0 && sweep.length === 0) {
    warn(`warning: no data rows in ${args.inputs.join(", ")}; ` +
      `rendering empty axes`);
  }
  const svg = renderChart(figureFor(args.kind, records, sweep, args.budget));
  await writeFile(args.out, svg, "utf8");
  return 0;
}

export async function main(argv: string[]): Promise<number> {
  try {
    return await run(argv);
  } catch (err) {
    const reason = err instanceof Error ? err.message : String(err);
    console.error(`error: ${reason}`);
    return 2;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
