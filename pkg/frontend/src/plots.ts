/**
 * Figure renderers for mcl CSV output. Each renderer validates the input
 * schema against the subcommand that produced it, then emits a standalone SVG
 * string. Values are plotted exactly as they appear in the file; the only
 * scaling anywhere is the fluct/(L/4) column the producer already wrote.
 */

import { CsvTable, column, distinct, requireSchema } from "./csv";
import { SERIES_COLORS, SvgDoc, drawFrame, fmt, viridis } from "./svg";

export interface PlotOptions {
  width?: number;
  height?: number;
  title?: string;
  /** heatmap value column (e.g. steady_n, steady_fluct_scaled, purity) */
  value?: string;
}

const HEATMAP_SOURCES: Record<string, string> = {
  "adaptive-sweep": "steady_n",
  "u1-sweep": "fluct_scaled",
};

export function renderHeatmap(table: CsvTable, opts: PlotOptions = {}): string {
  requireSchema(table, Object.keys(HEATMAP_SOURCES), ["pm", "theta"]);
  const sub = String(table.meta["subcommand"]);
  const valueCol = opts.value ?? HEATMAP_SOURCES[sub];
  requireSchema(table, [sub], [valueCol]);

  const pm = column(table, "pm");
  const theta = column(table, "theta");
  const values = column(table, valueCol);
  const xs = distinct(pm).sort((a, b) => a - b);
  const ys = distinct(theta).sort((a, b) => a - b);

  const doc = new SvgDoc(opts.width ?? 640, opts.height ?? 480);
  // frame in cell-index units; cells are labeled with the actual grid values
  const frame = drawFrame(
    doc,
    [0, xs.length],
    [0, ys.length],
    {
      x: "measurement rate",
      y: "noise amplitude",
      title: opts.title ?? `${valueCol} (${sub})`,
    },
    false
  );

  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  const cellW = (frame.right - frame.left) / xs.length;
  const cellH = (frame.bottom - frame.top) / ys.length;
  for (let k = 0; k < values.length; k++) {
    const i = xs.indexOf(pm[k]);
    const j = ys.indexOf(theta[k]);
    const color = viridis((values[k] - lo) / span);
    doc.rect(
      frame.left + i * cellW,
      frame.bottom - (j + 1) * cellH,
      cellW,
      cellH,
      color,
      ' stroke="white" stroke-width="0.5"'
    );
  }
  // grid-value labels at cell centers (heatmaps use the CSV grid directly)
  xs.forEach((v, i) =>
    doc.text(frame.left + (i + 0.5) * cellW, frame.bottom + 17, fmt(v), 11, "middle")
  );
  ys.forEach((v, j) =>
    doc.text(frame.left - 10, frame.bottom - (j + 0.5) * cellH + 4, fmt(v), 11, "end")
  );
  // colorbar
  const barX = doc.width - 14;
  for (let s = 0; s < 40; s++) {
    const t = s / 39;
    doc.rect(barX - 4, frame.bottom - (s + 1) * ((frame.bottom - frame.top) / 40), 8,
      (frame.bottom - frame.top) / 40 + 0.5, viridis(t));
  }
  doc.text(barX, frame.top - 4, fmt(hi), 10, "end");
  doc.text(barX, frame.bottom + 12, fmt(lo), 10, "end");
  return doc.render();
}

export function renderTimeseries(table: CsvTable, opts: PlotOptions = {}): string {
  requireSchema(table, ["adaptive-dynamics"], ["pm", "theta", "t", "n_bar"]);
  const pm = column(table, "pm");
  const theta = column(table, "theta");
  const t = column(table, "t");
  const n = column(table, "n_bar");

  const doc = new SvgDoc(opts.width ?? 640, opts.height ?? 480);
  const tMax = Math.max(...t);
  const lo = Math.min(0, ...n);
  const frame = drawFrame(doc, [0, tMax], [lo, 1], {
    x: "layer t",
    y: "order parameter",
    title: opts.title ?? "polarization dynamics",
  });

  const groups = distinct(pm.map((p, k) => p * 1e6 + theta[k]));
  groups.forEach((key, gi) => {
    const pts: Array<[number, number]> = [];
    for (let k = 0; k < t.length; k++) {
      if (pm[k] * 1e6 + theta[k] === key) pts.push([frame.x(t[k]), frame.y(n[k])]);
    }
    const color = SERIES_COLORS[gi % SERIES_COLORS.length];
    doc.polyline(pts, color);
    const p = pm[pm.findIndex((v, k) => v * 1e6 + theta[k] === key)];
    const th = theta[pm.findIndex((v, k) => v * 1e6 + theta[k] === key)];
    doc.text(frame.right - 4, frame.top + 14 + 14 * gi, `pm=${fmt(p)} th=${fmt(th)}`, 11, "end",
      ` fill="${color}"`);
  });
  return doc.render();
}

/** Steady-state curves vs noise amplitude; `overlay` adds the closed-form
 *  population-model prediction as a dashed line (compare mode). */
export function renderSteadyCurve(
  table: CsvTable,
  opts: PlotOptions = {},
  overlay = true
): string {
  requireSchema(table, ["classical-compare"], [
    "pm", "theta", "steady_n_sim", "steady_n_classical",
  ]);
  const pm = column(table, "pm");
  const theta = column(table, "theta");
  const sim = column(table, "steady_n_sim");
  const classical = column(table, "steady_n_classical");

  const doc = new SvgDoc(opts.width ?? 640, opts.height ?? 480);
  const yLo = Math.min(...sim, ...(overlay ? classical : sim));
  const frame = drawFrame(doc, [Math.min(...theta), Math.max(...theta)],
    [Math.max(0, yLo - 0.05), 1], {
      x: "noise amplitude",
      y: "steady-state order parameter",
      title: opts.title ?? (overlay ? "simulation vs population model" : "steady state"),
    });

  distinct(pm).forEach((p, gi) => {
    const color = SERIES_COLORS[gi % SERIES_COLORS.length];
    const simPts: Array<[number, number]> = [];
    const clPts: Array<[number, number]> = [];
    for (let k = 0; k < theta.length; k++) {
      if (pm[k] !== p) continue;
      simPts.push([frame.x(theta[k]), frame.y(sim[k])]);
      clPts.push([frame.x(theta[k]), frame.y(classical[k])]);
    }
    doc.polyline(simPts, color);
    simPts.forEach(([x, y]) => doc.circle(x, y, 3, color));
    if (overlay) {
      doc.polyline(clPts, color, 1.5, true);
    }
    doc.text(frame.right - 4, frame.top + 14 + 14 * gi,
      `pm=${fmt(p)}${overlay ? " (dashed: model)" : ""}`, 11, "end", ` fill="${color}"`);
  });
  return doc.render();
}

export function renderHistogram(table: CsvTable, opts: PlotOptions = {}): string {
  requireSchema(table, ["u1-hist"], ["pm", "theta", "bin_left", "bin_right", "mass"]);
  const pm = column(table, "pm");
  const theta = column(table, "theta");
  const left = column(table, "bin_left");
  const right = column(table, "bin_right");
  const mass = column(table, "mass");

  const doc = new SvgDoc(opts.width ?? 640, opts.height ?? 480);
  const frame = drawFrame(doc, [0, Math.max(...right)], [0, Math.max(...mass) * 1.05 || 1], {
    x: "charge fluctuations",
    y: "probability mass",
    title: opts.title ?? "fluctuation distribution",
  });

  const groups = distinct(pm.map((p, k) => p * 1e6 + theta[k]));
  groups.forEach((key, gi) => {
    const color = SERIES_COLORS[gi % SERIES_COLORS.length];
    const idx: number[] = [];
    for (let k = 0; k < mass.length; k++) {
      if (pm[k] * 1e6 + theta[k] === key) idx.push(k);
    }
    if (groups.length === 1) {
      for (const k of idx) {
        const x0 = frame.x(left[k]);
        const w = frame.x(right[k]) - x0;
        doc.rect(x0, frame.y(mass[k]), w, frame.bottom - frame.y(mass[k]),
          color, ' fill-opacity="0.65" stroke="white" stroke-width="0.5"');
      }
    } else {
      // step outline per series keeps overlapping panels readable
      const pts: Array<[number, number]> = [];
      for (const k of idx) {
        pts.push([frame.x(left[k]), frame.y(mass[k])]);
        pts.push([frame.x(right[k]), frame.y(mass[k])]);
      }
      doc.polyline(pts, color);
    }
    const k0 = idx[0];
    doc.text(frame.right - 4, frame.top + 14 + 14 * gi,
      `pm=${fmt(pm[k0])} th=${fmt(theta[k0])}`, 11, "end", ` fill="${color}"`);
  });
  return doc.render();
}

export type PlotKind = "heatmap" | "timeseries" | "steady-curve" | "compare" | "histogram";

export function render(kind: PlotKind, table: CsvTable, opts: PlotOptions = {}): string {
  switch (kind) {
    case "heatmap":
      return renderHeatmap(table, opts);
    case "timeseries":
      return renderTimeseries(table, opts);
    case "steady-curve":
      return renderSteadyCurve(table, opts, false);
    case "compare":
      return renderSteadyCurve(table, opts, true);
    case "histogram":
      return renderHistogram(table, opts);
    default:
      throw new Error(`unknown plot kind '${kind}'`);
  }
}
