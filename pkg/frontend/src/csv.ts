/**
 * Parsers for the simulator's CSV outputs.
 *
 * Record files carry the fixed header
 * slot,vehicle,policy,seed,pcrb,energy,queue,aoi_tan,z,p_misa,reward;
 * sweep summaries are generic keyed rows. A missing required column is an
 * error naming the column.
 */

export const RECORD_HEADER = [
  "slot", "vehicle", "policy", "seed", "pcrb", "energy", "queue",
  "aoi_tan", "z", "p_misa", "reward",
] as const;

export interface SlotRecord {
  slot: number;
  vehicle: number;
  policy: string;
  seed: number;
  pcrb: number;
  energy: number;
  queue: number;
  aoi_tan: number;
  z: number;
  p_misa: number;
  reward: number;
}

export interface SweepRow {
  [key: string]: string | number;
}

export class SchemaError extends Error {}

function splitLines(text: string): string[] {
  return text.split(/\r?\n/).filter((line) => line.trim().length > 0);
}

export function parseRecords(text: string, source = "<input>"): SlotRecord[] {
  const lines = splitLines(text);
  if (lines.length === 0) {
    throw new SchemaError(`${source}: empty file (expected a records CSV)`);
  }
  const header = lines[0].split(",");
  for (const column of RECORD_HEADER) {
    if (!header.includes(column)) {
      throw new SchemaError(`${source}: missing required column '${column}'`);
    }
  }
  const index = new Map(header.map((name, i) => [name, i]));
  const rows: SlotRecord[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    const pick = (name: string) => parts[index.get(name)!];
    rows.push({
      slot: Number(pick("slot")),
      vehicle: Number(pick("vehicle")),
      policy: pick("policy"),
      seed: Number(pick("seed")),
      pcrb: Number(pick("pcrb")),
      energy: Number(pick("energy")),
      queue: Number(pick("queue")),
      aoi_tan: Number(pick("aoi_tan")),
      z: Number(pick("z")),
      p_misa: Number(pick("p_misa")),
      reward: Number(pick("reward")),
    });
  }
  return rows;
}

export function parseSweep(
  text: string,
  required: string[],
  source = "<input>",
): SweepRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) {
    throw new SchemaError(`${source}: empty file (expected a sweep CSV)`);
  }
  const header = lines[0].split(",");
  for (const column of required) {
    if (!header.includes(column)) {
      throw new SchemaError(`${source}: missing required column '${column}'`);
    }
  }
  const rows: SweepRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    const row: SweepRow = {};
    header.forEach((name, j) => {
      const raw = parts[j];
      const num = Number(raw);
      row[name] = raw !== "" && Number.isFinite(num) ? num : raw;
    });
    rows.push(row);
  }
  return rows;
}
