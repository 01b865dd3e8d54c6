/**
 * Minimal deterministic SVG assembly: fixed number formatting, no ids, no
 * timestamps, so identical inputs yield byte-identical files.
 */

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  const s = x.toFixed(4);
  return s.replace(/\.?0+$/, "") || "0";
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

export function linearScale(
  domain: [number, number],
  range: [number, number]
): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  return scale;
}

export function ticks(lo: number, hi: number, count = 5): number[] {
  if (hi <= lo) return [lo];
  const step = Math.pow(10, Math.floor(Math.log10((hi - lo) / count)));
  const err = (hi - lo) / count / step;
  const unit = err >= 7.5 ? 10 * step : err >= 3.5 ? 5 * step : err >= 1.5 ? 2 * step : step;
  const out: number[] = [];
  for (let v = Math.ceil(lo / unit) * unit; v <= hi + unit * 1e-9; v += unit) {
    out.push(Math.abs(v) < unit * 1e-9 ? 0 : v);
  }
  return out;
}

// compact five-stop approximation of the viridis colormap
const VIRIDIS_STOPS: Array<[number, number, number]> = [
  [68, 1, 84],
  [59, 82, 139],
  [33, 145, 140],
  [94, 201, 98],
  [253, 231, 37],
];

export function viridis(t: number): string {
  const x = Math.min(1, Math.max(0, t)) * (VIRIDIS_STOPS.length - 1);
  const i = Math.min(VIRIDIS_STOPS.length - 2, Math.floor(x));
  const f = x - i;
  const mix = VIRIDIS_STOPS[i].map((a, k) =>
    Math.round(a + f * (VIRIDIS_STOPS[i + 1][k] - a))
  );
  return `#${mix.map((c) => c.toString(16).padStart(2, "0")).join("")}`;
}

export const SERIES_COLORS = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

export class SvgDoc {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  add(fragment: string): void {
    this.parts.push(fragment);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, extra = ""): void {
    this.add(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"${extra}/>`
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): void {
    this.add(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${fmt(width)}"/>`
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5, dashed = false): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    const dash = dashed ? ' stroke-dasharray="6 4"' : "";
    this.add(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${fmt(width)}"${dash}/>`
    );
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.add(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(r)}" fill="${fill}"/>`);
  }

  text(
    x: number,
    y: number,
    content: string,
    size = 12,
    anchor: "start" | "middle" | "end" = "start",
    extra = ""
  ): void {
    this.add(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" font-family="sans-serif" text-anchor="${anchor}"${extra}>${escapeXml(content)}</text>`
    );
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" ` +
      `viewBox="0 0 ${this.width} ${this.height}">\n<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

export interface Frame {
  x: Scale;
  y: Scale;
  left: number;
  top: number;
  right: number;
  bottom: number;
}

/** Axes, tick marks, labels, and optional title around a plot area. */
export function drawFrame(
  doc: SvgDoc,
  xDomain: [number, number],
  yDomain: [number, number],
  labels: { x: string; y: string; title?: string },
  showTicks = true
): Frame {
  const left = 62;
  const top = labels.title ? 34 : 16;
  const right = doc.width - 18;
  const bottom = doc.height - 46;
  const x = linearScale(xDomain, [left, right]);
  const y = linearScale(yDomain, [bottom, top]);

  doc.line(left, bottom, right, bottom, "#000");
  doc.line(left, top, left, bottom, "#000");
  if (showTicks) {
    for (const t of ticks(xDomain[0], xDomain[1])) {
      doc.line(x(t), bottom, x(t), bottom + 4, "#000");
      doc.text(x(t), bottom + 17, fmt(t), 11, "middle");
    }
    for (const t of ticks(yDomain[0], yDomain[1])) {
      doc.line(left - 4, y(t), left, y(t), "#000");
      doc.text(left - 7, y(t) + 4, fmt(t), 11, "end");
    }
  }
  doc.text((left + right) / 2, doc.height - 10, labels.x, 13, "middle");
  doc.add(
    `<text x="16" y="${fmt((top + bottom) / 2)}" font-size="13" font-family="sans-serif" ` +
      `text-anchor="middle" transform="rotate(-90 16 ${fmt((top + bottom) / 2)})">${escapeXml(labels.y)}</text>`
  );
  if (labels.title) {
    doc.text(doc.width / 2, 20, labels.title, 14, "middle");
  }
  return { x, y, left, top, right, bottom };
}
