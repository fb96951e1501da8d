/**
 * Figure builders for the thirdq reproduction datasets.
 *
 *  fig1: coefficient-difference vs trunc, one curve per (z1, sector)
 *  fig2: sigma_x(t): oracle crosses, closed-form solid, slow-mode dashed,
 *         spectral thin line; right panel: |spectral - closed form| vs trunc
 *         at t in {0.1, 1, 10} (log scale)
 *  fig3: closed-form dephasing sweep over z2, oracle markers when present
 */

import { column, numericColumn, parseCsv, requireColumns, Table } from "./csv.js";
import { PanelSpec, renderPanel, Series, svgDocument } from "./svg.js";

export type FigureId = "fig1" | "fig2" | "fig3";

export const SCHEMAS: Record<FigureId, string[]> = {
  fig1: ["z1", "sector", "trunc", "diff"],
  fig2: ["t", "value", "method"],
  fig3: ["t", "z2", "value", "method"],
};

const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

const uniqueInOrder = (values: string[]): string[] => {
  const out: string[] = [];
  for (const v of values) if (!out.includes(v)) out.push(v);
  return out;
};

function rowsWhere(table: Table, name: string, value: string): Table {
  const i = table.columns.indexOf(name);
  return { columns: table.columns, rows: table.rows.filter((r) => r[i] === value) };
}

// ---------------------------------------------------------------------------
// fig1
// ---------------------------------------------------------------------------

function buildFig1(table: Table): string {
  requireColumns(table, SCHEMAS.fig1);
  const z1s = uniqueInOrder(column(table, "z1"));
  const panels: string[] = [];
  z1s.forEach((z1, pi) => {
    const sub = rowsWhere(table, "z1", z1);
    const sectors = uniqueInOrder(column(sub, "sector"));
    const series: Series[] = sectors.map((sector, si) => {
      const ss = rowsWhere(sub, "sector", sector);
      return {
        xs: numericColumn(ss, "trunc"),
        ys: numericColumn(ss, "diff"),
        color: PALETTE[si % PALETTE.length],
        label: `sector ${sector}`,
        kind: "line",
      };
    });
    panels.push(
      renderPanel({
        x: 10 + pi * 440,
        y: 10,
        width: 430,
        height: 330,
        title: `coefficient convergence, z1 = ${z1}`,
        xLabel: "trunc",
        yLabel: "max |c(trunc) - c(trunc0)|",
        yLog: true,
        series,
      }),
    );
  });
  return svgDocument(20 + z1s.length * 440, 350, panels.join("\n"));
}

// ---------------------------------------------------------------------------
// fig2
// ---------------------------------------------------------------------------

const FIG2_STYLES: Record<string, Pick<Series, "color" | "kind" | "label" | "width">> = {
  oracle: { color: "#333333", kind: "cross", label: "oracle" },
  closed_form: { color: "#d62728", kind: "line", label: "closed form", width: 2 },
  small_z_approx: { color: "#1f77b4", kind: "dashed", label: "slow-mode approx" },
  spectral: { color: "#2ca02c", kind: "line", label: "spectral", width: 1 },
};

function buildFig2(table: Table): string {
  requireColumns(table, SCHEMAS.fig2);
  const methods = uniqueInOrder(column(table, "method"));
  const main: Series[] = [];
  for (const method of methods) {
    const style = FIG2_STYLES[method];
    if (!style) continue;
    const sub = rowsWhere(table, "method", method);
    let xs = numericColumn(sub, "t");
    let ys = numericColumn(sub, "value");
    if (method === "oracle") {
      // thin the markers so crosses stay legible
      const step = Math.max(1, Math.floor(xs.length / 40));
      xs = xs.filter((_, i) => i % step === 0);
      ys = ys.filter((_, i) => i % step === 0);
    }
    main.push({ xs, ys, ...style });
  }

  // discrepancy panel: |spectral_truncNN - closed form| at the probe times
  const closed = rowsWhere(table, "method", "closed_form");
  const closedAt = new Map(
    numericColumn(closed, "t").map((t, i) => [t, numericColumn(closed, "value")[i]]),
  );
  const panelMethods = methods.filter((m) => /^spectral_trunc\d+$/.test(m));
  const probeTimes = uniqueInOrder(
    column(rowsWhere(table, "method", panelMethods[0] ?? ""), "t"),
  ).map(Number);
  const discrepancy: Series[] = probeTimes.map((t, i) => {
    const xs: number[] = [];
    const ys: number[] = [];
    for (const m of panelMethods) {
      const sub = rowsWhere(table, "method", m);
      const ts = numericColumn(sub, "t");
      const vs = numericColumn(sub, "value");
      const k = ts.indexOf(t);
      const ref = closedAt.get(t);
      if (k >= 0 && ref !== undefined) {
        xs.push(Number(m.replace("spectral_trunc", "")));
        ys.push(Math.abs(vs[k] - ref));
      }
    }
    return {
      xs,
      ys,
      color: PALETTE[i % PALETTE.length],
      label: `t = ${t}`,
      kind: "dot" as const,
    };
  });

  const panels = [
    renderPanel({
      x: 10, y: 10, width: 470, height: 340,
      title: "sigma_x expectation vs time",
      xLabel: "t", yLabel: "<sigma_x(t)>",
      series: main,
    }),
  ];
  if (panelMethods.length > 0) {
    panels.push(
      renderPanel({
        x: 490, y: 10, width: 400, height: 340,
        title: "discrepancy vs trunc",
        xLabel: "trunc", yLabel: "|spectral - closed form|",
        yLog: true,
        series: discrepancy,
      }),
    );
  }
  return svgDocument(900, 360, panels.join("\n"));
}

// ---------------------------------------------------------------------------
// fig3
// ---------------------------------------------------------------------------

function buildFig3(table: Table): string {
  requireColumns(table, SCHEMAS.fig3);
  const z2s = uniqueInOrder(column(table, "z2"));
  const series: Series[] = [];
  z2s.forEach((z2, i) => {
    const sub = rowsWhere(table, "z2", z2);
    const closed = rowsWhere(sub, "method", "closed_form");
    series.push({
      xs: numericColumn(closed, "t"),
      ys: numericColumn(closed, "value"),
      color: PALETTE[i % PALETTE.length],
      label: `z2 = ${z2}`,
      kind: "line",
    });
    const orc = rowsWhere(sub, "method", "oracle");
    if (orc.rows.length > 0) {
      let xs = numericColumn(orc, "t");
      let ys = numericColumn(orc, "value");
      const step = Math.max(1, Math.floor(xs.length / 25));
      xs = xs.filter((_, k) => k % step === 0);
      ys = ys.filter((_, k) => k % step === 0);
      series.push({
        xs, ys,
        color: PALETTE[i % PALETTE.length],
        label: `oracle, z2 = ${z2}`,
        kind: "cross",
      });
    }
  });
  const panel: PanelSpec = {
    x: 10, y: 10, width: 560, height: 380,
    title: "dephasing sweep",
    xLabel: "t", yLabel: "<sigma_x(t)>",
    series,
  };
  return svgDocument(580, 400, renderPanel(panel));
}

// ---------------------------------------------------------------------------

export function renderFigure(id: FigureId, csvText: string): string {
  const table = parseCsv(csvText);
  switch (id) {
    case "fig1":
      return buildFig1(table);
    case "fig2":
      return buildFig2(table);
    case "fig3":
      return buildFig3(table);
  }
}

/** fig3 rows at z2 = 0 must coincide with fig2's closed-form curve. */
export function fig3MatchesFig2ClosedForm(
  fig3Text: string,
  fig2Text: string,
): { maxGap: number; points: number } {
  const f3 = parseCsv(fig3Text);
  requireColumns(f3, SCHEMAS.fig3);
  const f2 = parseCsv(fig2Text);
  requireColumns(f2, SCHEMAS.fig2);
  const base = rowsWhere(rowsWhere(f3, "method", "closed_form"), "z2", "0.0");
  const ref = rowsWhere(f2, "method", "closed_form");
  const refAt = new Map(
    numericColumn(ref, "t").map((t, i) => [t, numericColumn(ref, "value")[i]]),
  );
  const ts = numericColumn(base, "t");
  const vs = numericColumn(base, "value");
  let maxGap = 0;
  let points = 0;
  ts.forEach((t, i) => {
    const r = refAt.get(t);
    if (r !== undefined) {
      maxGap = Math.max(maxGap, Math.abs(vs[i] - r));
      points += 1;
    }
  });
  if (points === 0) {
    throw new Error("no shared time points between fig3 (z2 = 0) and fig2");
  }
  return { maxGap, points };
}
