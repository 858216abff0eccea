/**
 * Deterministic SVG chart primitives: linear/log scales, tick generation,
 * polylines, uncertainty bands, legend. No DOM, no randomness — identical
 * inputs render byte-identical documents.
 */

export interface Margins {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  const s = x.toPrecision(6);
  return s.includes(".") || s.includes("e")
    ? s.replace(/\.?0+(e|$)/, "$1")
    : s;
}

export interface Scale {
  (value: number): number;
  ticks(): number[];
  domain: [number, number];
  kind: "linear" | "log";
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    d0 -= 1;
    d1 += 1;
  }
  const f = ((value: number) =>
    range[0] + ((value - d0) / (d1 - d0)) * (range[1] - range[0])) as Scale;
  f.domain = [d0, d1];
  f.kind = "linear";
  f.ticks = () => {
    const span = d1 - d0;
    const step = Math.pow(10, Math.floor(Math.log10(span / 4)));
    const mult = span / step > 20 ? 5 : span / step > 8 ? 2 : 1;
    const inc = step * mult;
    const start = Math.ceil(d0 / inc) * inc;
    const out: number[] = [];
    for (let t = start; t <= d1 + 1e-12 * span; t += inc) {
      out.push(Math.abs(t) < inc * 1e-9 ? 0 : t);
    }
    return out;
  };
  return f;
}

export function logScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  const lo = Math.max(domain[0], Number.MIN_VALUE);
  const hi = Math.max(domain[1], lo * 10);
  const [l0, l1] = [Math.log10(lo), Math.log10(hi)];
  const f = ((value: number) => {
    const v = Math.max(value, Number.MIN_VALUE);
    return range[0] + ((Math.log10(v) - l0) / (l1 - l0)) * (range[1] - range[0]);
  }) as Scale;
  f.domain = [lo, hi];
  f.kind = "log";
  f.ticks = () => {
    const out: number[] = [];
    for (let e = Math.ceil(l0); e <= Math.floor(l1); e++) {
      out.push(Math.pow(10, e));
    }
    if (out.length === 0) out.push(lo, hi);
    return out;
  };
  return f;
}

export interface Series {
  label: string;
  xs: number[];
  ys: number[];
  band?: { lo: number[]; hi: number[] };
  marker?: boolean;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  yLog?: boolean;
  hline?: { y: number; label: string };
  width?: number;
  height?: number;
  note?: string;
}

export function renderChart(spec: ChartSpec): string {
  const width = spec.width ?? 860;
  const height = spec.height ?? 520;
  const m: Margins = { top: 48, right: 24, bottom: 56, left: 78 };
  const plotW: [number, number] = [m.left, width - m.right];
  const plotH: [number, number] = [height - m.bottom, m.top];

  const xsAll = spec.series.flatMap((s) => s.xs);
  let ysAll = spec.series.flatMap((s) =>
    s.band ? s.ys.concat(s.band.lo, s.band.hi) : s.ys,
  );
  if (spec.hline) ysAll = ysAll.concat(spec.hline.y);
  if (spec.yLog) ysAll = ysAll.filter((y) => y > 0);
  const empty = xsAll.length === 0 || ysAll.length === 0;
  const xDomain: [number, number] = empty
    ? [0, 1]
    : [Math.min(...xsAll), Math.max(...xsAll)];
  const yMin = empty ? (spec.yLog ? 1e-6 : 0) : Math.min(...ysAll);
  const yMax = empty ? 1 : Math.max(...ysAll);
  const pad = spec.yLog ? 0 : 0.05 * (yMax - yMin || 1);
  const x = linearScale(xDomain, plotW);
  const y = spec.yLog
    ? logScale([yMin, yMax], plotH)
    : linearScale([yMin - pad, yMax + pad], plotH);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
      `height="${height}" viewBox="0 0 ${width} ${height}" ` +
      `font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="#ffffff"/>`);
  parts.push(
    `<text x="${width / 2}" y="24" text-anchor="middle" font-size="16" ` +
      `fill="#111">${escapeXml(spec.title)}</text>`,
  );

  // axes and grid
  parts.push(
    `<g class="axes" stroke="#333" stroke-width="1">` +
      `<line x1="${plotW[0]}" y1="${plotH[0]}" x2="${plotW[1]}" y2="${plotH[0]}"/>` +
      `<line x1="${plotW[0]}" y1="${plotH[0]}" x2="${plotW[0]}" y2="${plotH[1]}"/>` +
      `</g>`,
  );
  for (const t of x.ticks()) {
    const px = x(t);
    parts.push(
      `<line x1="${fmt(px)}" y1="${plotH[0]}" x2="${fmt(px)}" ` +
        `y2="${plotH[0] + 5}" stroke="#333"/>` +
        `<text x="${fmt(px)}" y="${plotH[0] + 20}" text-anchor="middle" ` +
        `font-size="11" fill="#333">${fmt(t)}</text>`,
    );
  }
  for (const t of y.ticks()) {
    const py = y(t);
    const label = spec.yLog ? `1e${Math.round(Math.log10(t))}` : fmt(t);
    parts.push(
      `<line x1="${plotW[0] - 5}" y1="${fmt(py)}" x2="${plotW[0]}" ` +
        `y2="${fmt(py)}" stroke="#333"/>` +
        `<line x1="${plotW[0]}" y1="${fmt(py)}" x2="${plotW[1]}" ` +
        `y2="${fmt(py)}" stroke="#eee"/>` +
        `<text x="${plotW[0] - 9}" y="${fmt(py + 4)}" text-anchor="end" ` +
        `font-size="11" fill="#333">${label}</text>`,
    );
  }
  parts.push(
    `<text x="${(plotW[0] + plotW[1]) / 2}" y="${height - 14}" ` +
      `text-anchor="middle" font-size="13" fill="#111">` +
      `${escapeXml(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text transform="rotate(-90 18 ${(plotH[0] + plotH[1]) / 2})" x="18" ` +
      `y="${(plotH[0] + plotH[1]) / 2}" text-anchor="middle" font-size="13" ` +
      `fill="#111">${escapeXml(spec.yLabel)}</text>`,
  );

  if (empty) {
    parts.push(
      `<text x="${(plotW[0] + plotW[1]) / 2}" ` +
        `y="${(plotH[0] + plotH[1]) / 2}" text-anchor="middle" ` +
        `font-size="13" fill="#999">no data</text>`,
    );
  }

  spec.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    if (s.band) {
      const fwd = s.xs.map((xv, j) => `${fmt(x(xv))},${fmt(y(s.band!.hi[j]))}`);
      const back = [...s.xs.keys()]
        .reverse()
        .map((j) => `${fmt(x(s.xs[j]))},${fmt(y(s.band!.lo[j]))}`);
      parts.push(
        `<polygon class="band" points="${fwd.concat(back).join(" ")}" ` +
          `fill="${color}" opacity="0.15" stroke="none"/>`,
      );
    }
    const pts = s.xs.map((xv, j) => `${fmt(x(xv))},${fmt(y(s.ys[j]))}`);
    parts.push(
      `<polyline class="series" data-label="${escapeXml(s.label)}" ` +
        `points="${pts.join(" ")}" fill="none" stroke="${color}" ` +
        `stroke-width="1.6"/>`,
    );
    if (s.marker) {
      for (const p of pts) {
        const [cx, cy] = p.split(",");
        parts.push(
          `<circle cx="${cx}" cy="${cy}" r="3" fill="${color}"/>`,
        );
      }
    }
  });

  if (spec.hline) {
    const py = y(spec.hline.y);
    parts.push(
      `<line class="budget-line" x1="${plotW[0]}" y1="${fmt(py)}" ` +
        `x2="${plotW[1]}" y2="${fmt(py)}" stroke="#000" ` +
        `stroke-dasharray="7,4" stroke-width="1.4"/>` +
        `<text x="${plotW[1] - 4}" y="${fmt(py - 6)}" text-anchor="end" ` +
        `font-size="12" fill="#000">${escapeXml(spec.hline.label)}</text>`,
    );
  }

  // legend
  spec.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const ly = m.top + 8 + i * 18;
    parts.push(
      `<line x1="${plotW[1] - 150}" y1="${ly}" x2="${plotW[1] - 122}" ` +
        `y2="${ly}" stroke="${color}" stroke-width="2"/>` +
        `<text x="${plotW[1] - 116}" y="${ly + 4}" font-size="12" ` +
        `fill="#111">${escapeXml(s.label)}</text>`,
    );
  });

  if (spec.note) {
    parts.push(
      `<text x="${m.left}" y="${m.top - 8}" font-size="11" fill="#666">` +
        `${escapeXml(spec.note)}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
