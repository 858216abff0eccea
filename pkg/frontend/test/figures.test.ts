import { mkdtemp, readFile, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { RECORD_HEADER, parseRecords } from "../src/csv.js";
import { energyBudget, pcrbConvergence, pcrbVsSnr, queueEvolution } from "../src/figures.js";
import { renderChart } from "../src/svg.js";
import { main, parseArgs, run } from "../src/plot.js";

const HEADER = RECORD_HEADER.join(",");

function recordsCsv(rows: Array<[number, number, string, number, number, number, number]>): string {
  // [slot, vehicle, policy, seed, pcrb, energy, queue]
  const lines = rows.map(([slot, vehicle, policy, seed, pcrb, energy, queue]) =>
    [slot, vehicle, policy, seed, pcrb, energy, queue, 1, 0.0, 0.0, -1.0].join(","));
  return [HEADER, ...lines].join("\n") + "\n";
}

async function tmpFile(name: string, content: string): Promise<string> {
  const dir = await mkdtemp(join(tmpdir(), "misac-plots-"));
  const path = join(dir, name);
  await writeFile(path, content, "utf8");
  return path;
}

describe("figure construction", () => {
  it("pcrb convergence uses the running cumulative mean of slot means", () => {
    const csv = recordsCsv([
      [0, 0, "p", 0, 2.0, 0, 0],
      [0, 1, "p", 0, 4.0, 0, 0],   // slot 0 vehicle mean 3.0
      [1, 0, "p", 0, 5.0, 0, 0],
      [1, 1, "p", 0, 7.0, 0, 0],   // slot 1 vehicle mean 6.0 -> prefix 4.5
    ]);
    const spec = pcrbConvergence(parseRecords(csv));
    expect(spec.series).toHaveLength(1);
    expect(spec.series[0].ys).toEqual([3.0, 4.5]);
    expect(spec.yLabel).toMatch(/running mean/);
    expect(spec.yLog).toBe(true);
  });

  it("energy figure sums vehicles per slot and carries the budget line", () => {
    const csv = recordsCsv([
      [0, 0, "p", 0, 1, 12.0, 0],
      [0, 1, "p", 0, 1, 6.0, 0],   // slot total 18
      [1, 0, "p", 0, 1, 30.0, 0],
      [1, 1, "p", 0, 1, 12.0, 0],  // slot total 42 -> prefix 30
    ]);
    const spec = energyBudget(parseRecords(csv), 20.0);
    expect(spec.series[0].ys).toEqual([18.0, 30.0]);
    expect(spec.hline).toEqual({ y: 20.0, label: "budget 20 J" });
  });

  it("queue figure keeps raw per-slot means", () => {
    const csv = recordsCsv([
      [0, 0, "p", 0, 1, 0, 100.0],
      [1, 0, "p", 0, 1, 0, 300.0],
    ]);
    const spec = queueEvolution(parseRecords(csv));
    expect(spec.series[0].ys).toEqual([100.0, 300.0]);
  });

  it("multi-seed input collapses to mean with a std band", () => {
    const csv = recordsCsv([
      [0, 0, "p", 0, 2.0, 0, 0],
      [0, 0, "p", 1, 4.0, 0, 0],
    ]);
    const spec = queueEvolution(parseRecords(csv));
    expect(spec.series[0].ys).toEqual([0.0]);
    const pcrb = pcrbConvergence(parseRecords(csv));
    expect(pcrb.series[0].ys).toEqual([3.0]);
    expect(pcrb.series[0].band).toBeDefined();
    expect(pcrb.series[0].band!.hi[0]).toBeCloseTo(4.0, 12);
  });

  it("snr figure sorts the grid and uses a log axis", () => {
    const rows = [
      { snr_db: 10, policy: "radar-only", pcrb_steady_mean: 0.01 },
      { snr_db: 0, policy: "radar-only", pcrb_steady_mean: 0.9 },
      { snr_db: 20, policy: "radar-only", pcrb_steady_mean: 0.001 },
    ];
    const spec = pcrbVsSnr(rows);
    expect(spec.series[0].xs).toEqual([0, 10, 20]);
    expect(spec.series[0].ys).toEqual([0.9, 0.01, 0.001]);
    expect(spec.yLog).toBe(true);
    const svg = renderChart(spec);
    expect(svg).toMatch(/1e-\d/);   // exponential tick labels on the log axis
  });
});

describe("plot CLI", () => {
  it("renders records end to end and is byte-identical on reruns", async () => {
    const csv = recordsCsv([
      [0, 0, "radar-only", 0, 1e-4, 1.0, 10],
      [1, 0, "radar-only", 0, 2e-4, 1.5, 20],
      [0, 0, "vision-only", 0, 1e-6, 25.0, 0],
      [1, 0, "vision-only", 0, 1e-6, 25.0, 0],
    ]);
    const input = await tmpFile("runs.csv", csv);
    const out1 = await tmpFile("fig1.svg", "");
    const out2 = await tmpFile("fig2.svg", "");
    const argv = ["--kind", "energy-budget", "--in", input, "--out"];
    expect(await run(argv.concat(out1))).toBe(0);
    expect(await run(argv.concat(out2))).toBe(0);
    const [a, b] = await Promise.all([readFile(out1), readFile(out2)]);
    expect(a.equals(b)).toBe(true);
    const svg = a.toString();
    expect(svg).toContain("budget-line");
    expect(svg).toContain("budget 20 J");
    expect(svg).toContain("<svg");
  });

  it("header-only input renders empty axes, warns and exits 0", async () => {
    const input = await tmpFile("empty.csv", HEADER + "\n");
    const out = await tmpFile("empty.svg", "");
    const warnings: string[] = [];
    const code = await run(
      ["--kind", "queue-evolution", "--in", input, "--out", out],
      (msg) => warnings.push(msg),
    );
    expect(code).toBe(0);
    expect(warnings.join(" ")).toMatch(/no data rows/);
    const svg = (await readFile(out)).toString();
    expect(svg).toContain("no data");
    expect(svg).toContain("<svg");
  });

  it("schema violations name the column and exit nonzero", async () => {
    const input = await tmpFile("bad.csv", "slot,vehicle\n0,0\n");
    const out = await tmpFile("bad.svg", "");
    const code = await main(["--kind", "queue-evolution", "--in", input,
                             "--out", out]);
    expect(code).toBe(2);
  });

  it("rejects bad flags and kinds", () => {
    expect(() => parseArgs(["--kind", "nope", "--in", "x", "--out", "y"]))
      .toThrowError(/--kind must be one of/);
    expect(() => parseArgs(["--in", "x", "--out", "y"]))
      .toThrowError(/--kind is required/);
    expect(() => parseArgs(["--kind", "pcrb-vs-snr", "--out", "y"]))
      .toThrowError(/--in requires/);
    expect(() => parseArgs(["--frobnicate"])).toThrowError(/unknown flag/);
  });

  it("budget flag moves the reference line", async () => {
    const csv = recordsCsv([[0, 0, "p", 0, 1, 5.0, 0]]);
    const input = await tmpFile("r.csv", csv);
    const out = await tmpFile("fig.svg", "");
    await run(["--kind", "energy-budget", "--in", input, "--out", out,
               "--budget", "7.5"]);
    const svg = (await readFile(out)).toString();
    expect(svg).toContain("budget 7.5 J");
  });
});
