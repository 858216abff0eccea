import { describe, expect, it } from "vitest";
import { parseRecords, parseSweep, SchemaError, RECORD_HEADER } from "../src/csv.js";

const HEADER = RECORD_HEADER.join(",");

function row(slot: number, vehicle: number, pcrb: number): string {
  return [slot, vehicle, "radar-only", 0, pcrb, 0.5, 1000.0, 3, 0.0, 0.1, -1.5]
    .join(",");
}

describe("parseRecords", () => {
  it("parses the fixed schema with exact values", () => {
    const text = [HEADER, row(0, 0, 1.25e-5), row(0, 1, 2.5e-5)].join("\n");
    const records = parseRecords(text);
    expect(records).toHaveLength(2);
    expect(records[0].pcrb).toBe(1.25e-5);
    expect(records[1].vehicle).toBe(1);
    expect(records[0].policy).toBe("radar-only");
  });

  it("accepts a header-only file as zero rows", () => {
    expect(parseRecords(HEADER)).toEqual([]);
  });

  it("names the missing column", () => {
    const broken = HEADER.replace("p_misa,", "");
    expect(() => parseRecords(broken + "\n", "x.csv")).toThrowError(
      /x\.csv: missing required column 'p_misa'/,
    );
    expect(() => parseRecords(broken)).toThrowError(SchemaError);
  });

  it("rejects an empty file", () => {
    expect(() => parseRecords("", "e.csv")).toThrowError(/empty file/);
  });

  it("round-trips full float precision", () => {
    const value = 0.1234567890123456789;
    const text = [HEADER, row(5, 0, value)].join("\n");
    expect(parseRecords(text)[0].pcrb).toBe(0.12345678901234568);
  });
});

describe("parseSweep", () => {
  it("parses numeric and string fields", () => {
    const text = "snr_db,policy,pcrb_steady_mean\n0.0,radar-only,0.5\n";
    const rows = parseSweep(text, ["snr_db", "policy", "pcrb_steady_mean"]);
    expect(rows[0].snr_db).toBe(0);
    expect(rows[0].policy).toBe("radar-only");
  });

  it("names missing sweep columns", () => {
    expect(() =>
      parseSweep("snr_db,policy\n0,x\n", ["snr_db", "pcrb_steady_mean"], "s.csv"),
    ).toThrowError(/missing required column 'pcrb_steady_mean'/);
  });
});
