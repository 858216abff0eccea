/**
 * The four figure analogues, built from parsed simulator output.
 *
 * Time-averaged curves use the running cumulative mean (full-prefix
 * window) and say so on the axis; per-seed series are collapsed to a
 * mean with a +/- one standard deviation band. Values are taken from the
 * CSVs untransformed otherwise.
 */

import { SlotRecord, SweepRow, SchemaError } from "./csv.js";
import { ChartSpec, Series } from "./svg.js";

export type FigureKind =
  | "pcrb-convergence"
  | "energy-budget"
  | "queue-evolution"
  | "pcrb-vs-snr";

export const FIGURE_KINDS: FigureKind[] = [
  "pcrb-convergence",
  "energy-budget",
  "queue-evolution",
  "pcrb-vs-snr",
];

/** slot -> mean over vehicles (pcrb, queue) or sum over vehicles (energy) */
function perSlot(
  records: SlotRecord[],
  field: "pcrb" | "queue" | "energy",
): Map<number, number> {
  const sums = new Map<number, { total: number; n: number }>();
  for (const r of records) {
    const cell = sums.get(r.slot) ?? { total: 0, n: 0 };
    cell.total += r[field];
    cell.n += 1;
    sums.set(r.slot, cell);
  }
  const out = new Map<number, number>();
  for (const [slot, { total, n }] of sums) {
    out.set(slot, field === "energy" ? total : total / n);
  }
  return out;
}

function cumulativeMean(values: number[]): number[] {
  const out = new Array<number>(values.length);
  let acc = 0;
  for (let i = 0; i < values.length; i++) {
    acc += values[i];
    out[i] = acc / (i + 1);
  }
  return out;
}

function meanStd(rows: number[][]): { mean: number[]; std: number[] } {
  const n = rows[0].length;
  const mean = new Array<number>(n).fill(0);
  const std = new Array<number>(n).fill(0);
  for (const row of rows) {
    for (let i = 0; i < n; i++) mean[i] += row[i] / rows.length;
  }
  if (rows.length > 1) {
    for (const row of rows) {
      for (let i = 0; i < n; i++) {
        std[i] += (row[i] - mean[i]) ** 2 / rows.length;
      }
    }
    for (let i = 0; i < n; i++) std[i] = Math.sqrt(std[i]);
  }
  return { mean, std };
}

function groupSeries(
  records: SlotRecord[],
  field: "pcrb" | "queue" | "energy",
  cumulative: boolean,
): Series[] {
  const byPolicy = new Map<string, Map<number, SlotRecord[]>>();
  for (const r of records) {
    const seeds = byPolicy.get(r.policy) ?? new Map();
    const rows = seeds.get(r.seed) ?? [];
    rows.push(r);
    seeds.set(r.seed, rows);
    byPolicy.set(r.policy, seeds);
  }
  const series: Series[] = [];
  for (const policy of [...byPolicy.keys()].sort()) {
    const seeds = byPolicy.get(policy)!;
    let xs: number[] = [];
    const perSeed: number[][] = [];
    for (const seed of [...seeds.keys()].sort((a, b) => a - b)) {
      const slotMap = perSlot(seeds.get(seed)!, field);
      const slots = [...slotMap.keys()].sort((a, b) => a - b);
      xs = slots;
      const values = slots.map((s) => slotMap.get(s)!);
      perSeed.push(cumulative ? cumulativeMean(values) : values);
    }
    const { mean, std } = meanStd(perSeed);
    const entry: Series = { label: policy, xs, ys: mean };
    if (perSeed.length > 1) {
      entry.band = {
        lo: mean.map((m, i) => m - std[i]),
        hi: mean.map((m, i) => m + std[i]),
      };
    }
    series.push(entry);
  }
  return series;
}

export function pcrbConvergence(records: SlotRecord[]): ChartSpec {
  return {
    title: "Time-averaged angular PCRB",
    xLabel: "slot",
    yLabel: "running mean PCRB (rad^2), full-prefix window",
    series: groupSeries(records, "pcrb", true),
    yLog: true,
    note: "cumulative mean per slot; band: +/- 1 std over seeds",
  };
}

export function energyBudget(records: SlotRecord[], budget: number): ChartSpec {
  return {
    title: "Time-averaged system energy vs budget",
    xLabel: "slot",
    yLabel: "running mean energy per slot (J), full-prefix window",
    series: groupSeries(records, "energy", true),
    hline: { y: budget, label: `budget ${budget} J` },
    note: "cumulative mean per slot; band: +/- 1 std over seeds",
  };
}

export function queueEvolution(records: SlotRecord[]): ChartSpec {
  return {
    title: "Edge computing queue evolution",
    xLabel: "slot",
    yLabel: "mean backlog per vehicle (cycles)",
    series: groupSeries(records, "queue", false),
  };
}

export function pcrbVsSnr(rows: SweepRow[]): ChartSpec {
  const byPolicy = new Map<string, SweepRow[]>();
  for (const row of rows) {
    const policy = String(row.policy);
    const list = byPolicy.get(policy) ?? [];
    list.push(row);
    byPolicy.set(policy, list);
  }
  const series: Series[] = [];
  for (const policy of [...byPolicy.keys()].sort()) {
    const list = byPolicy
      .get(policy)!
      .slice()
      .sort((a, b) => Number(a.snr_db) - Number(b.snr_db));
    const xs = list.map((r) => Number(r.snr_db));
    const ys = list.map((r) => Number(r.pcrb_steady_mean));
    const entry: Series = { label: policy, xs, ys, marker: true };
    if (list.every((r) => "pcrb_steady_std" in r)) {
      const std = list.map((r) => Number(r.pcrb_steady_std));
      entry.band = {
        lo: ys.map((y, i) => Math.max(y - std[i], y * 1e-3)),
        hi: ys.map((y, i) => y + std[i]),
      };
    }
    series.push(entry);
  }
  return {
    title: "Steady-state PCRB vs receive SNR",
    xLabel: "SNR (dB)",
    yLabel: "steady-state PCRB (rad^2), log scale",
    series,
    yLog: true,
  };
}

export function figureFor(
  kind: FigureKind,
  records: SlotRecord[],
  sweep: SweepRow[],
  budget: number,
): ChartSpec {
  switch (kind) {
    case "pcrb-convergence":
      return pcrbConvergence(records);
    case "energy-budget":
      return energyBudget(records, budget);
    case "queue-evolution":
      return queueEvolution(records);
    case "pcrb-vs-snr":
      return pcrbVsSnr(sweep);
    default:
      throw new SchemaError(`unknown figure kind '${kind}'`);
  }
}
