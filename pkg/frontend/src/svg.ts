/**
 * Minimal deterministic SVG chart toolkit.
 *
 * Everything is a pure function of its inputs under the pinned style: fixed
 * canvas size, palette, font and number formatting, so identical inputs give
 * byte-identical SVG (and therefore pixel-identical PNG).
 */

export const WIDTH = 880;
export const HEIGHT = 620;
export const FONT = "DejaVu Sans";
export const PALETTE = ["#5b3794", "#2a7ab8", "#c4493d", "#3d8f5f", "#b8862a", "#7a7a7a"];

export interface Frame {
  x0: number;
  y0: number;
  w: number;
  h: number;
}

export type Scale = (v: number) => number;

export function fmt(v: number): string {
  if (!Number.isFinite(v)) return "0";
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

/** Two-significant-digit coefficient formatting for legends. */
export function coeff2(v: number): string {
  return Number(v.toPrecision(2)).toString();
}

export function linScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function logScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const l0 = Math.log(d0);
  const span = Math.log(d1) - l0 || 1;
  return (v) => r0 + ((Math.log(v) - l0) / span) * (r1 - r0);
}

export function ticks(lo: number, hi: number, target = 6): number[] {
  const span = hi - lo;
  if (!(span > 0)) return [lo];
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= target) ?? 10 * mag;
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}

export function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let e = Math.floor(Math.log10(lo)); e <= Math.ceil(Math.log10(hi)); e++) {
    for (const m of [1, 2, 5]) {
      const v = m * Math.pow(10, e);
      if (v >= lo * 0.999 && v <= hi * 1.001) out.push(v);
    }
  }
  return out.length >= 2 ? out : [lo, hi];
}

const esc = (s: string) => s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export class Canvas {
  private parts: string[] = [];

  add(part: string): void {
    this.parts.push(part);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.add(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"${d}/>`
    );
  }

  polyline(pts: [number, number][], stroke: string, width = 2, dash = "", cls = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    const c = cls ? ` class="${cls}"` : "";
    const coords = pts.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.add(`<polyline${c} points="${coords}" fill="none" stroke="${stroke}" stroke-width="${width}"${d}/>`);
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.add(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, stroke = "none"): void {
    this.add(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}" stroke="${stroke}"/>`
    );
  }

  text(x: number, y: number, s: string, size = 13, anchor = "start", fill = "#222", rotate = 0): void {
    const r = rotate ? ` transform="rotate(${rotate} ${fmt(x)} ${fmt(y)})"` : "";
    this.add(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="${FONT}" font-size="${size}" text-anchor="${anchor}" fill="${fill}"${r}>${esc(s)}</text>`
    );
  }

  render(width = WIDTH, height = HEIGHT): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">` +
      `<rect width="${width}" height="${height}" fill="#ffffff"/>` +
      this.parts.join("") +
      `</svg>`
    );
  }
}

export interface AxisSpec {
  frame: Frame;
  xticks: number[];
  yticks: number[];
  xscale: Scale;
  yscale: Scale;
  xlabel: string;
  ylabel: string;
  tickFmt?: (v: number) => string;
  fontSize?: number;
}

export function drawAxes(c: Canvas, spec: AxisSpec): void {
  const { frame, xscale, yscale } = spec;
  const f = spec.tickFmt ?? ((v: number) => (Math.abs(v) >= 1000 || (v !== 0 && Math.abs(v) < 0.01) ? v.toExponential(0) : String(Math.round(v * 1000) / 1000)));
  const size = spec.fontSize ?? 13;
  c.rect(frame.x0, frame.y0, frame.w, frame.h, "none", "#444");
  for (const t of spec.xticks) {
    const x = xscale(t);
    c.line(x, frame.y0 + frame.h, x, frame.y0 + frame.h + 4, "#444");
    c.line(x, frame.y0, x, frame.y0 + frame.h, "#eeeeee");
    c.text(x, frame.y0 + frame.h + size + 6, f(t), size - 1, "middle", "#333");
  }
  for (const t of spec.yticks) {
    const y = yscale(t);
    c.line(frame.x0 - 4, y, frame.x0, y, "#444");
    c.line(frame.x0, y, frame.x0 + frame.w, y, "#eeeeee");
    c.text(frame.x0 - 7, y + 4, f(t), size - 1, "end", "#333");
  }
  c.text(frame.x0 + frame.w / 2, frame.y0 + frame.h + 2.6 * size, spec.xlabel, size, "middle");
  c.text(frame.x0 - 46, frame.y0 + frame.h / 2, spec.ylabel, size, "middle", "#222", -90);
}

export interface LegendEntry {
  label: string;
  color: string;
  dash?: string;
}

export function drawLegend(c: Canvas, x: number, y: number, entries: LegendEntry[]): void {
  const lineH = 18;
  entries.forEach((e, i) => {
    const yy = y + i * lineH;
    c.line(x, yy - 4, x + 26, yy - 4, e.color, 2.5, e.dash ?? "");
    c.text(x + 32, yy, e.label, 12);
  });
}
