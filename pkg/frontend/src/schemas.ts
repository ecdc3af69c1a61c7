/**
 * Strict parsers for the simulator's result-file schemas.
 *
 * Columns are fixed and ordered; any mismatch, extra column or non-numeric
 * cell is a hard SchemaError carrying the file and line it came from.  No
 * numerical analysis happens here or anywhere downstream: fit curves are
 * read from the fit JSON exactly as the simulator wrote them.
 */

export class SchemaError extends Error {}

export const TAU_COLUMNS = ["beta", "L", "tau", "ci_lo", "ci_hi"] as const;
export const PAIR_COLUMNS = ["t", "mean_mass", "sem_mass", "mean_spread", "sem_spread"] as const;

export interface TauRow {
  beta: number;
  L: number;
  tau: number;
  ci_lo: number;
  ci_hi: number;
}

export interface PairRow {
  t: number;
  mean_mass: number;
  sem_mass: number;
  mean_spread: number;
  sem_spread: number;
}

export interface FitReport {
  model: "arrhenius" | "super_exp" | "power_law";
  names: string[];
  coefficients: number[];
  residuals: number[];
  rms: number;
  points: [number, number][];
  meta: Record<string, number | string>;
}

export interface GradientFit {
  betas: number[];
  gradients: number[];
  slope: number;
  intercept: number;
}

export interface FitDoc {
  reports: FitReport[];
  gradient_fit?: GradientFit;
}

function parseNumber(cell: string, file: string, line: number, column: string): number {
  const v = cell === "inf" ? Infinity : cell === "-inf" ? -Infinity : Number(cell);
  if (cell.trim() === "" || Number.isNaN(v)) {
    throw new SchemaError(`${file}:${line}: column '${column}' is not a number: '${cell}'`);
  }
  return v;
}

function parseCsv(text: string, file: string, columns: readonly string[]): number[][] {
  const lines = text.split(/\r?\n/).filter((l, i, arr) => !(l === "" && i === arr.length - 1));
  if (lines.length === 0) {
    throw new SchemaError(`${file}: empty input`);
  }
  const header = lines[0].split(",");
  if (header.length !== columns.length || !columns.every((c, i) => header[i] === c)) {
    throw new SchemaError(
      `${file}:1: expected header '${columns.join(",")}', got '${lines[0]}'`
    );
  }
  if (lines.length === 1) {
    throw new SchemaError(`${file}: no data rows`);
  }
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    if (lines[i] === "") {
      throw new SchemaError(`${file}:${i + 1}: blank line inside data`);
    }
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(
        `${file}:${i + 1}: expected ${columns.length} columns, got ${cells.length}`
      );
    }
    rows.push(cells.map((c, j) => parseNumber(c, file, i + 1, columns[j])));
  }
  return rows;
}

export function parseTauCsv(text: string, file: string): TauRow[] {
  return parseCsv(text, file, TAU_COLUMNS).map((r) => ({
    beta: r[0],
    L: r[1],
    tau: r[2],
    ci_lo: r[3],
    ci_hi: r[4],
  }));
}

export function parsePairCsv(text: string, file: string): PairRow[] {
  return parseCsv(text, file, PAIR_COLUMNS).map((r) => ({
    t: r[0],
    mean_mass: r[1],
    sem_mass: r[2],
    mean_spread: r[3],
    sem_spread: r[4],
  }));
}

const MODELS = new Set(["arrhenius", "super_exp", "power_law"]);

function isNumberArray(x: unknown): x is number[] {
  return Array.isArray(x) && x.every((v) => typeof v === "number" && Number.isFinite(v));
}

export function parseFitJson(text: string, file: string): FitDoc {
  let doc: any;
  try {
    doc = JSON.parse(text);
  } catch (e) {
    throw new SchemaError(`${file}: not valid JSON: ${(e as Error).message}`);
  }
  if (doc === null || typeof doc !== "object") {
    throw new SchemaError(`${file}: expected a JSON object`);
  }
  if (doc.schema_version !== 1) {
    throw new SchemaError(`${file}: schema_version must be 1, got ${doc.schema_version}`);
  }
  if (!Array.isArray(doc.reports) || doc.reports.length === 0) {
    throw new SchemaError(`${file}: 'reports' must be a non-empty array`);
  }
  const reports: FitReport[] = doc.reports.map((rep: any, i: number) => {
    const where = `${file}: reports[${i}]`;
    if (!MODELS.has(rep?.model)) {
      throw new SchemaError(`${where}: unknown model '${rep?.model}'`);
    }
    if (!isNumberArray(rep.coefficients) || rep.coefficients.length === 0) {
      throw new SchemaError(`${where}: 'coefficients' must be a numeric array`);
    }
    if (!isNumberArray(rep.residuals)) {
      throw new SchemaError(`${where}: 'residuals' must be a numeric array`);
    }
    if (
      !Array.isArray(rep.points) ||
      !rep.points.every((p: unknown) => isNumberArray(p) && (p as number[]).length === 2)
    ) {
      throw new SchemaError(`${where}: 'points' must be [x, tau] pairs`);
    }
    return {
      model: rep.model,
      names: Array.isArray(rep.names) ? rep.names.map(String) : [],
      coefficients: rep.coefficients,
      residuals: rep.residuals,
      rms: typeof rep.rms === "number" ? rep.rms : NaN,
      points: rep.points as [number, number][],
      meta: rep.meta ?? {},
    };
  });
  let gradient: GradientFit | undefined;
  if (doc.gradient_fit !== undefined) {
    const g = doc.gradient_fit;
    if (
      !isNumberArray(g?.betas) ||
      !isNumberArray(g?.gradients) ||
      typeof g?.slope !== "number" ||
      typeof g?.intercept !== "number"
    ) {
      throw new SchemaError(`${file}: 'gradient_fit' is malformed`);
    }
    gradient = { betas: g.betas, gradients: g.gradients, slope: g.slope, intercept: g.intercept };
  }
  return { reports, gradient_fit: gradient };
}
