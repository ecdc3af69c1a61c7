import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import * as path from "path";
import { describe, expect, it } from "vitest";

import { fittedForm, renderSinglePair } from "../src/figures";
import { buildSvg, renderToFile, svgToPng } from "../src/render";
import { SchemaError, parseFitJson, parsePairCsv, parseTauCsv } from "../src/schemas";
import { coeff2 } from "../src/svg";

const TMP = mkdtempSync(path.join(tmpdir(), "znkmc-plots-"));

function write(name: string, text: string): string {
  const p = path.join(TMP, name);
  writeFileSync(p, text);
  return p;
}

function tauCsv(rows: [number, number, number][]): string {
  return (
    "beta,L,tau,ci_lo,ci_hi\n" +
    rows.map(([b, L, t]) => `${b},${L},${t},${t * 0.9},${t * 1.1}`).join("\n") +
    "\n"
  );
}

function pairCsv(masses: [number, number, number][]): string {
  return (
    "t,mean_mass,sem_mass,mean_spread,sem_spread\n" +
    masses.map(([t, m, s]) => `${t},${m},0.01,${s},0.01`).join("\n") +
    "\n"
  );
}

const QUAD_FIT = {
  schema_version: 1,
  reports: [
    {
      model: "super_exp",
      names: ["a", "b", "c"],
      coefficients: [0.028, 0.54, -2.5],
      residuals: [0.01, -0.02, 0.005],
      rms: 0.013,
      points: [
        [6.0, 2.4],
        [7.5, 9.2],
        [9.0, 41.0],
      ],
      meta: {},
    },
    {
      model: "arrhenius",
      names: ["epsilon", "c"],
      coefficients: [0.96, -4.0],
      residuals: [-0.03, 0.05, -0.02],
      rms: 0.036,
      points: [
        [6.0, 2.4],
        [7.5, 9.2],
        [9.0, 41.0],
      ],
      meta: {},
    },
  ],
};

function sizeFit(betaGs: [number, number][]) {
  return {
    schema_version: 1,
    reports: betaGs.map(([beta, g]) => ({
      model: "power_law",
      names: ["G", "c"],
      coefficients: [g, 0.4],
      residuals: [0.0, 0.0, 0.0],
      rms: 0.0,
      points: [
        [8, 2.0],
        [16, 3.1],
        [24, 4.0],
      ],
      meta: { beta },
    })),
    gradient_fit: {
      betas: betaGs.map(([b]) => b),
      gradients: betaGs.map(([, g]) => g),
      slope: 0.11,
      intercept: -0.15,
    },
  };
}

describe("schema validation", () => {
  it("rejects a wrong tau header with the file and line", () => {
    expect(() => parseTauCsv("beta,L,tau\n1,2,3\n", "x.csv")).toThrowError(
      /x\.csv:1: expected header 'beta,L,tau,ci_lo,ci_hi'/
    );
  });

  it("rejects non-numeric cells with their line number", () => {
    const text = "beta,L,tau,ci_lo,ci_hi\n6,16,oops,1,2\n";
    expect(() => parseTauCsv(text, "y.csv")).toThrowError(/y\.csv:2: column 'tau'/);
  });

  it("rejects empty and header-only inputs", () => {
    expect(() => parseTauCsv("", "e.csv")).toThrowError(SchemaError);
    expect(() => parseTauCsv("beta,L,tau,ci_lo,ci_hi\n", "h.csv")).toThrowError(/no data rows/);
  });

  it("rejects wrong column counts in pair CSVs", () => {
    const text = "t,mean_mass,sem_mass,mean_spread,sem_spread\n1,2,3,4\n";
    expect(() => parsePairCsv(text, "p.csv")).toThrowError(/p\.csv:2: expected 5 columns/);
  });

  it("rejects malformed fit JSON", () => {
    expect(() => parseFitJson("{not json", "f.json")).toThrowError(/not valid JSON/);
    expect(() => parseFitJson('{"schema_version": 2, "reports": []}', "f.json")).toThrowError(
      /schema_version/
    );
    const badModel = JSON.stringify({
      schema_version: 1,
      reports: [{ model: "cubic", coefficients: [1], residuals: [], points: [] }],
    });
    expect(() => parseFitJson(badModel, "f.json")).toThrowError(/unknown model 'cubic'/);
  });

  it("accepts inf taus but refuses to draw when nothing is finite", () => {
    const rows = parseTauCsv("beta,L,tau,ci_lo,ci_hi\n6,16,inf,inf,inf\n", "i.csv");
    expect(rows[0].tau).toBe(Infinity);
    const fits = write("f.json", JSON.stringify(QUAD_FIT));
    const csv = write("i.csv", "beta,L,tau,ci_lo,ci_hi\n6,16,inf,inf,inf\n");
    expect(() =>
      buildSvg({ kind: "beta_scaling", inputs: [csv], fits, out: "o.svg" })
    ).toThrowError(/no finite positive tau/);
  });
});

describe("figure rendering", () => {
  it("size_scaling smoke: tau CSV with 3 betas gives one fit line per beta", () => {
    const csv = write(
      "taus.csv",
      tauCsv([
        [7.6, 8, 2.1], [7.6, 16, 3.4], [7.6, 24, 4.4],
        [8.2, 8, 2.9], [8.2, 16, 5.2], [8.2, 24, 7.6],
        [8.8, 8, 4.0], [8.8, 16, 8.1], [8.8, 24, 12.9],
      ])
    );
    const fits = write("size_fit.json", JSON.stringify(sizeFit([[7.6, 0.69], [8.2, 0.75], [8.8, 0.82]])));
    const out = path.join(TMP, "size.png");
    renderToFile({ kind: "size_scaling", inputs: [csv], fits, out });
    const png = readFileSync(out);
    expect(png.length).toBeGreaterThan(1000);
    expect(png.subarray(1, 4).toString()).toBe("PNG");
    const svg = buildSvg({ kind: "size_scaling", inputs: [csv], fits, out });
    expect(svg.match(/class="fit-line"/g)?.length).toBe(3);
  });

  it("beta_scaling legend shows the fitted form at two significant digits", () => {
    const csv = write("beta.csv", tauCsv([[6, 72, 2.4], [7.5, 72, 9.2], [9, 72, 41.0]]));
    const fits = write("quad.json", JSON.stringify(QUAD_FIT));
    const svg = buildSvg({ kind: "beta_scaling", inputs: [csv], fits, out: "b.svg" });
    expect(svg).toContain("exp(0.028β² + 0.54β - 2.5)");
    expect(svg).toContain("exp(0.96β - 4)");
    expect(svg).toContain("residuals of ln τ");
    expect(svg.match(/class="fit-curve"/g)?.length).toBe(2);
  });

  it("beta_scaling rejects mixed lattice sizes", () => {
    const csv = write("mixy.csv", tauCsv([[6, 16, 2.4], [7, 24, 5.0], [8, 16, 9.0]]));
    const fits = write("quad2.json", JSON.stringify(QUAD_FIT));
    expect(() => buildSvg({ kind: "beta_scaling", inputs: [csv], fits, out: "m.svg" })).toThrowError(
      /single lattice size/
    );
  });

  it("single_pair draws solid mass and dashed spread per input", () => {
    const grid = write("grid.csv", pairCsv([[0.25, 0.81, 0.52], [2.0, 0.9, 0.7], [12.0, 1.1, 1.3]]));
    const none = write("no_grid.csv", pairCsv([[0.25, 2.0, 0.57], [2.0, 2.0, 1.1], [12.0, 2.0, 2.1]]));
    const svg = buildSvg({ kind: "single_pair", inputs: [grid, none], out: "sp.svg" });
    expect(svg.match(/class="mass-curve"/g)?.length).toBe(2);
    expect(svg.match(/class="spread-curve"/g)?.length).toBe(2);
    expect(svg).toContain("grid: total mass");
    expect(svg).toContain("no_grid: spread");
  });

  it("re-renders are byte-identical under the pinned style", () => {
    const csv = write("det.csv", tauCsv([[6, 16, 2.4], [7.5, 16, 9.2], [9, 16, 41.0]]));
    const fits = write("det.json", JSON.stringify(QUAD_FIT));
    const job = { kind: "beta_scaling" as const, inputs: [csv], fits, out: "d.png" };
    const svg1 = buildSvg(job);
    const svg2 = buildSvg(job);
    expect(svg1).toBe(svg2);
    const png1 = svgToPng(svg1);
    const png2 = svgToPng(svg2);
    expect(png1.equals(png2)).toBe(true);
  });
});

describe("formatting", () => {
  it("coefficients render at two significant digits", () => {
    expect(coeff2(0.028341)).toBe("0.028");
    expect(coeff2(-2.503)).toBe("-2.5");
    expect(coeff2(0.96)).toBe("0.96");
    expect(fittedForm(QUAD_FIT.reports[0] as any)).toBe("τ ~ exp(0.028β² + 0.54β - 2.5)");
  });
});
