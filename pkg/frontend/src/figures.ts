/**
 * The three figure kinds, each a pure function from parsed inputs to an SVG
 * string.  Fit curves are drawn by evaluating the coefficients stored in the
 * fit JSON; nothing is refitted here.
 */

import {
  Canvas,
  Frame,
  PALETTE,
  drawAxes,
  drawLegend,
  coeff2,
  linScale,
  logScale,
  logTicks,
  ticks,
} from "./svg";
import { FitDoc, FitReport, PairRow, SchemaError, TauRow } from "./schemas";

export type FigureKind = "single_pair" | "beta_scaling" | "size_scaling";

export interface NamedSeries {
  label: string;
  rows: PairRow[];
}

const MAIN: Frame = { x0: 70, y0: 40, w: 760, h: 480 };

function term(v: number, suffix: string): string {
  return v >= 0 ? ` + ${coeff2(v)}${suffix}` : ` - ${coeff2(-v)}${suffix}`;
}

/** Legend form of a fitted model, coefficients at two significant digits. */
export function fittedForm(rep: FitReport): string {
  const c = rep.coefficients;
  if (rep.model === "super_exp") {
    return `τ ~ exp(${coeff2(c[0])}β²${term(c[1], "β")}${term(c[2], "")})`;
  }
  if (rep.model === "arrhenius") {
    return `τ ~ exp(${coeff2(c[0])}β${term(c[1], "")})`;
  }
  return `τ ~ L^${coeff2(c[0])}`;
}

function finiteTaus(rows: TauRow[], file: string): TauRow[] {
  const out = rows.filter((r) => Number.isFinite(r.tau) && r.tau > 0);
  if (out.length === 0) {
    throw new SchemaError(`${file}: no finite positive tau values to draw`);
  }
  return out;
}

function range(values: number[], pad = 0.06): [number, number] {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || Math.abs(hi) || 1;
  return [lo - pad * span, hi + pad * span];
}

// ---------------------------------------------------------------------------

export function renderSinglePair(series: NamedSeries[]): string {
  if (series.length === 0) {
    throw new SchemaError("single_pair needs at least one CSV input");
  }
  const c = new Canvas();
  const allT = series.flatMap((s) => s.rows.map((r) => r.t));
  const allY = series.flatMap((s) => s.rows.flatMap((r) => [r.mean_mass, r.mean_spread]));
  const [tLo, tHi] = [Math.min(...allT), Math.max(...allT)];
  const [yLo, yHi] = range(allY.concat([0]));
  const xs = logScale(tLo, tHi, MAIN.x0, MAIN.x0 + MAIN.w);
  const ys = linScale(yLo, yHi, MAIN.y0 + MAIN.h, MAIN.y0);
  drawAxes(c, {
    frame: MAIN,
    xticks: logTicks(tLo, tHi),
    yticks: ticks(yLo, yHi),
    xscale: xs,
    yscale: ys,
    xlabel: "time",
    ylabel: "mass / spread",
  });
  const legend: { label: string; color: string; dash?: string }[] = [];
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    c.polyline(s.rows.map((r) => [xs(r.t), ys(r.mean_mass)]), color, 2.5, "", "mass-curve");
    c.polyline(s.rows.map((r) => [xs(r.t), ys(r.mean_spread)]), color, 2, "7 4", "spread-curve");
    legend.push({ label: `${s.label}: total mass`, color });
    legend.push({ label: `${s.label}: spread`, color, dash: "7 4" });
  });
  drawLegend(c, MAIN.x0 + 14, MAIN.y0 + 22, legend);
  return c.render();
}

// ---------------------------------------------------------------------------

function evalModel(rep: FitReport, x: number): number {
  const c = rep.coefficients;
  if (rep.model === "super_exp") return c[0] * x * x + c[1] * x + c[2];
  if (rep.model === "arrhenius") return c[0] * x + c[1];
  return c[0] * Math.log(x) + c[1];
}

export function renderBetaScaling(taus: TauRow[], fits: FitDoc, file: string): string {
  const rows = finiteTaus(taus, file);
  const sizes = new Set(rows.map((r) => r.L));
  if (sizes.size !== 1) {
    throw new SchemaError(`${file}: beta_scaling expects a single lattice size, got ${[...sizes].join(", ")}`);
  }
  const reports = fits.reports.filter((r) => r.model === "arrhenius" || r.model === "super_exp");
  if (reports.length === 0) {
    throw new SchemaError("beta_scaling needs an arrhenius or super_exp report in the fit JSON");
  }
  const c = new Canvas();
  const betas = rows.map((r) => r.beta);
  const lnTaus = rows.map((r) => Math.log(r.tau));
  const [xLo, xHi] = range(betas);
  const [yLo, yHi] = range(lnTaus, 0.12);
  const xs = linScale(xLo, xHi, MAIN.x0, MAIN.x0 + MAIN.w);
  const ys = linScale(yLo, yHi, MAIN.y0 + MAIN.h, MAIN.y0);
  drawAxes(c, {
    frame: MAIN,
    xticks: ticks(xLo, xHi),
    yticks: ticks(yLo, yHi),
    xscale: xs,
    yscale: ys,
    xlabel: "inverse temperature β",
    ylabel: "ln τ",
  });
  const legend: { label: string; color: string; dash?: string }[] = [];
  reports.forEach((rep, i) => {
    const color = PALETTE[(i + 1) % PALETTE.length];
    const pts: [number, number][] = [];
    for (let k = 0; k <= 120; k++) {
      const b = xLo + ((xHi - xLo) * k) / 120;
      pts.push([xs(b), ys(evalModel(rep, b))]);
    }
    c.polyline(pts, color, 2, rep.model === "arrhenius" ? "7 4" : "", "fit-curve");
    legend.push({ label: fittedForm(rep), color, dash: rep.model === "arrhenius" ? "7 4" : "" });
  });
  rows.forEach((r) => c.circle(xs(r.beta), ys(Math.log(r.tau)), 4, "#222"));
  drawLegend(c, MAIN.x0 + 14, MAIN.y0 + 22, legend);

  // residual inset, bottom right: raw ln-tau residuals per model
  const inset: Frame = { x0: MAIN.x0 + MAIN.w - 250, y0: MAIN.y0 + MAIN.h - 180, w: 225, h: 145 };
  c.rect(inset.x0 - 8, inset.y0 - 20, inset.w + 16, inset.h + 52, "#ffffff", "#999");
  const resVals = reports.flatMap((r) => r.residuals);
  const [rLo, rHi] = range(resVals.concat([0]), 0.15);
  const rys = linScale(rLo, rHi, inset.y0 + inset.h, inset.y0);
  const rxs = linScale(xLo, xHi, inset.x0, inset.x0 + inset.w);
  drawAxes(c, {
    frame: inset,
    xticks: ticks(xLo, xHi, 4),
    yticks: ticks(rLo, rHi, 3),
    xscale: rxs,
    yscale: rys,
    xlabel: "",
    ylabel: "",
    fontSize: 10,
  });
  c.text(inset.x0 + inset.w / 2, inset.y0 - 6, "residuals of ln τ", 11, "middle", "#333");
  c.line(inset.x0, rys(0), inset.x0 + inset.w, rys(0), "#bbbbbb", 1, "3 3");
  reports.forEach((rep, i) => {
    const color = PALETTE[(i + 1) % PALETTE.length];
    rep.points.forEach(([x], k) => {
      if (k < rep.residuals.length) c.circle(rxs(x), rys(rep.residuals[k]), 3, color);
    });
  });
  return c.render();
}

// ---------------------------------------------------------------------------

export function renderSizeScaling(taus: TauRow[], fits: FitDoc, file: string): string {
  const rows = finiteTaus(taus, file);
  const reports = fits.reports
    .filter((r) => r.model === "power_law" && typeof r.meta.beta === "number")
    .sort((a, b) => (a.meta.beta as number) - (b.meta.beta as number));
  if (reports.length === 0) {
    throw new SchemaError("size_scaling needs power_law reports with meta.beta in the fit JSON");
  }
  const c = new Canvas();
  const allL = rows.map((r) => r.L);
  const allLn = rows.map((r) => Math.log(r.tau));
  const [lLo, lHi] = [Math.min(...allL) / 1.06, Math.max(...allL) * 1.06];
  const [yLo, yHi] = range(allLn, 0.12);
  const xs = logScale(lLo, lHi, MAIN.x0, MAIN.x0 + MAIN.w);
  const ys = linScale(yLo, yHi, MAIN.y0 + MAIN.h, MAIN.y0);
  drawAxes(c, {
    frame: MAIN,
    xticks: [...new Set(allL)].sort((a, b) => a - b),
    yticks: ticks(yLo, yHi),
    xscale: xs,
    yscale: ys,
    xlabel: "linear size L",
    ylabel: "ln τ",
  });
  const betaSorted = [...new Set(rows.map((r) => r.beta))].sort((a, b) => a - b);
  const colorOf = new Map(betaSorted.map((b, i) => [b, PALETTE[i % PALETTE.length]]));
  rows.forEach((r) => c.circle(xs(r.L), ys(Math.log(r.tau)), 4, colorOf.get(r.beta) ?? "#222"));
  const legend: { label: string; color: string; dash?: string }[] = [];
  reports.forEach((rep) => {
    const beta = rep.meta.beta as number;
    const color = colorOf.get(beta) ?? "#222";
    const pts: [number, number][] = [];
    for (let k = 0; k <= 80; k++) {
      const L = lLo * Math.pow(lHi / lLo, k / 80);
      pts.push([xs(L), ys(evalModel(rep, L))]);
    }
    c.polyline(pts, color, 2, "", "fit-line");
    legend.push({ label: `β = ${beta}: ${fittedForm(rep)}`, color });
  });
  drawLegend(c, MAIN.x0 + 14, MAIN.y0 + 22, legend);

  if (fits.gradient_fit) {
    const g = fits.gradient_fit;
    const inset: Frame = { x0: MAIN.x0 + MAIN.w - 250, y0: MAIN.y0 + MAIN.h - 180, w: 225, h: 145 };
    c.rect(inset.x0 - 8, inset.y0 - 20, inset.w + 16, inset.h + 52, "#ffffff", "#999");
    const [bLo, bHi] = range(g.betas, 0.1);
    const [gLo, gHi] = range(g.gradients, 0.2);
    const gxs = linScale(bLo, bHi, inset.x0, inset.x0 + inset.w);
    const gys = linScale(gLo, gHi, inset.y0 + inset.h, inset.y0);
    drawAxes(c, {
      frame: inset,
      xticks: ticks(bLo, bHi, 4),
      yticks: ticks(gLo, gHi, 3),
      xscale: gxs,
      yscale: gys,
      xlabel: "",
      ylabel: "",
      fontSize: 10,
    });
    c.text(inset.x0 + inset.w / 2, inset.y0 - 6, `gradient G(β) = ${coeff2(g.slope)}β${term(g.intercept, "")}`, 11, "middle", "#333");
    c.polyline(
      [
        [gxs(bLo), gys(g.slope * bLo + g.intercept)],
        [gxs(bHi), gys(g.slope * bHi + g.intercept)],
      ],
      "#444",
      1.5
    );
    g.betas.forEach((b, i) => c.circle(gxs(b), gys(g.gradients[i]), 3, colorOf.get(b) ?? "#222"));
  }
  return c.render();
}
