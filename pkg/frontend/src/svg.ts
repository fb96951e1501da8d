/**
 * Hand-rolled SVG plotting: scales, axes, polylines, markers, legends.
 * Output is deterministic text so repeated runs produce identical files.
 */

export interface Scale {
  (x: number): number;
  ticks(): number[];
}

export interface Series {
  xs: number[];
  ys: number[];
  color: string;
  label: string;
  kind: "line" | "dashed" | "cross" | "dot";
  width?: number;
}

export interface PanelSpec {
  x: number;
  y: number;
  width: number;
  height: number;
  title: string;
  xLabel: string;
  yLabel: string;
  xLog?: boolean;
  yLog?: boolean;
  series: Series[];
}

const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

const fmt = (v: number): string => {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0).replace("e", "e");
  return String(Number(v.toPrecision(6)));
};

function niceLinearTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= n + 1)!;
  const first = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let e = Math.ceil(Math.log10(lo)); Math.pow(10, e) <= hi * (1 + 1e-9); e++) {
    out.push(Math.pow(10, e));
  }
  return out.length ? out : [lo];
}

export function makeScale(
  lo: number,
  hi: number,
  rangeLo: number,
  rangeHi: number,
  log = false,
): Scale {
  if (log) {
    const llo = Math.log10(lo);
    const lhi = Math.log10(hi);
    const f = ((x: number) =>
      rangeLo + ((Math.log10(x) - llo) / (lhi - llo || 1)) * (rangeHi - rangeLo)) as Scale;
    f.ticks = () => logTicks(lo, hi);
    return f;
  }
  const f = ((x: number) =>
    rangeLo + ((x - lo) / (hi - lo || 1)) * (rangeHi - rangeLo)) as Scale;
  f.ticks = () => niceLinearTicks(lo, hi);
  return f;
}

function extent(values: number[], log: boolean): [number, number] {
  const ok = values.filter((v) => Number.isFinite(v) && (!log || v > 0));
  if (ok.length === 0) return log ? [1e-16, 1] : [0, 1];
  let lo = Math.min(...ok);
  let hi = Math.max(...ok);
  if (log) {
    lo /= 1.5;
    hi *= 1.5;
  } else {
    const pad = 0.05 * (hi - lo || Math.abs(hi) || 1);
    lo -= pad;
    hi += pad;
  }
  return [lo, hi];
}

function crossMarker(x: number, y: number, color: string): string {
  const d = 3;
  return (
    `<path d="M${x - d},${y - d} L${x + d},${y + d} ` +
    `M${x - d},${y + d} L${x + d},${y - d}" stroke="${color}" fill="none"/>`
  );
}

export function renderPanel(p: PanelSpec): string {
  const left = p.x + 52;
  const right = p.x + p.width - 10;
  const top = p.y + 26;
  const bottom = p.y + p.height - 38;

  const allX = p.series.flatMap((s) => s.xs);
  const allY = p.series.flatMap((s) => s.ys);
  const [xLo, xHi] = extent(allX, !!p.xLog);
  const [yLo, yHi] = extent(allY, !!p.yLog);
  const sx = makeScale(xLo, xHi, left, right, p.xLog);
  const sy = makeScale(yLo, yHi, bottom, top, p.yLog);

  const parts: string[] = [];
  parts.push(
    `<text x="${(left + right) / 2}" y="${p.y + 14}" text-anchor="middle" ` +
      `${FONT} font-size="12" font-weight="bold">${p.title}</text>`,
  );
  parts.push(
    `<rect x="${left}" y="${top}" width="${right - left}" ` +
      `height="${bottom - top}" fill="none" stroke="#333"/>`,
  );
  for (const t of sx.ticks()) {
    const x = sx(t);
    if (x < left - 0.5 || x > right + 0.5) continue;
    parts.push(`<line x1="${x}" y1="${bottom}" x2="${x}" y2="${bottom + 4}" stroke="#333"/>`);
    parts.push(
      `<text x="${x}" y="${bottom + 16}" text-anchor="middle" ${FONT} ` +
        `font-size="10">${fmt(t)}</text>`,
    );
  }
  for (const t of sy.ticks()) {
    const y = sy(t);
    if (y < top - 0.5 || y > bottom + 0.5) continue;
    parts.push(`<line x1="${left - 4}" y1="${y}" x2="${left}" y2="${y}" stroke="#333"/>`);
    parts.push(
      `<text x="${left - 7}" y="${y + 3}" text-anchor="end" ${FONT} ` +
        `font-size="10">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${(left + right) / 2}" y="${bottom + 30}" text-anchor="middle" ` +
      `${FONT} font-size="11">${p.xLabel}</text>`,
  );
  parts.push(
    `<text x="${p.x + 14}" y="${(top + bottom) / 2}" text-anchor="middle" ` +
      `${FONT} font-size="11" transform="rotate(-90 ${p.x + 14} ` +
      `${(top + bottom) / 2})">${p.yLabel}</text>`,
  );

  for (const s of p.series) {
    const pts = s.xs
      .map((x, i) => [x, s.ys[i]] as [number, number])
      .filter(([x, y]) => Number.isFinite(x) && Number.isFinite(y) &&
        (!p.xLog || x > 0) && (!p.yLog || y > 0));
    if (s.kind === "cross" || s.kind === "dot") {
      for (const [x, y] of pts) {
        parts.push(
          s.kind === "cross"
            ? crossMarker(sx(x), sy(y), s.color)
            : `<circle cx="${sx(x)}" cy="${sy(y)}" r="2.4" fill="${s.color}"/>`,
        );
      }
    } else {
      const d = pts
        .map(([x, y], i) => `${i ? "L" : "M"}${sx(x).toFixed(2)},${sy(y).toFixed(2)}`)
        .join(" ");
      const dash = s.kind === "dashed" ? ` stroke-dasharray="6 4"` : "";
      parts.push(
        `<path d="${d}" fill="none" stroke="${s.color}" ` +
          `stroke-width="${s.width ?? 1.5}"${dash}/>`,
      );
    }
  }

  // legend, top-right corner of the frame
  let ly = top + 12;
  for (const s of p.series) {
    const lx = right - 120;
    if (s.kind === "cross") {
      parts.push(crossMarker(lx + 9, ly - 3, s.color));
    } else if (s.kind === "dot") {
      parts.push(`<circle cx="${lx + 9}" cy="${ly - 3}" r="2.4" fill="${s.color}"/>`);
    } else {
      const dash = s.kind === "dashed" ? ` stroke-dasharray="6 4"` : "";
      parts.push(
        `<line x1="${lx}" y1="${ly - 3}" x2="${lx + 18}" y2="${ly - 3}" ` +
          `stroke="${s.color}" stroke-width="${s.width ?? 1.5}"${dash}/>`,
      );
    }
    parts.push(
      `<text x="${lx + 23}" y="${ly}" ${FONT} font-size="10">${s.label}</text>`,
    );
    ly += 13;
  }
  return parts.join("\n");
}

export function svgDocument(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
    `height="${height}" viewBox="0 0 ${width} ${height}">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n` +
    `${body}\n</svg>\n`
  );
}
