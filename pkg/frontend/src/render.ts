/**
 * Figure-job execution: read inputs, build the SVG, emit SVG or PNG by
 * output extension.  The PNG rasterization pins the font set, so re-renders
 * are pixel-identical.
 */

import { readFileSync, writeFileSync } from "fs";
import * as path from "path";
import { Resvg } from "@resvg/resvg-js";

import { FigureKind, renderBetaScaling, renderSinglePair, renderSizeScaling } from "./figures";
import { SchemaError, parseFitJson, parsePairCsv, parseTauCsv } from "./schemas";
import { FONT } from "./svg";

export interface FigureJob {
  kind: FigureKind;
  inputs: string[];
  fits?: string;
  out: string;
}

export function buildSvg(job: FigureJob): string {
  if (job.inputs.length === 0) {
    throw new SchemaError("no --in inputs given");
  }
  if (job.kind === "single_pair") {
    const series = job.inputs.map((file) => ({
      label: path.basename(file).replace(/\.[^.]*$/, ""),
      rows: parsePairCsv(readFileSync(file, "utf-8"), file),
    }));
    return renderSinglePair(series);
  }
  if (!job.fits) {
    throw new SchemaError(`${job.kind} needs --fits <fit json>`);
  }
  const fits = parseFitJson(readFileSync(job.fits, "utf-8"), job.fits);
  const taus = job.inputs.flatMap((file) => parseTauCsv(readFileSync(file, "utf-8"), file));
  if (job.kind === "beta_scaling") {
    return renderBetaScaling(taus, fits, job.inputs.join(","));
  }
  if (job.kind === "size_scaling") {
    return renderSizeScaling(taus, fits, job.inputs.join(","));
  }
  throw new SchemaError(`unknown figure kind '${job.kind}'`);
}

export function svgToPng(svg: string): Buffer {
  const r = new Resvg(svg, {
    font: { loadSystemFonts: true, defaultFontFamily: FONT },
    background: "#ffffff",
  });
  return Buffer.from(r.render().asPng());
}

export function renderToFile(job: FigureJob): string {
  const svg = buildSvg(job);
  const ext = path.extname(job.out).toLowerCase();
  if (ext === ".svg") {
    writeFileSync(job.out, svg, "utf-8");
  } else if (ext === ".png") {
    writeFileSync(job.out, svgToPng(svg));
  } else {
    throw new SchemaError(`unsupported output extension '${ext}' (use .svg or .png)`);
  }
  return job.out;
}
