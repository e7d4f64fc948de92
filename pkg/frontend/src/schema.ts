/** Figure specs and the typed views of the sweep CSV schema. */

import { CsvTable, requireColumns } from "./csv";

export const FIGURE_IDS = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"] as const;
export type FigureId = (typeof FIGURE_IDS)[number];

export interface FigureSpec {
  csv_path: string;
  figure_id: FigureId;
  output_path: string;
  /** Axis label overrides; sensible defaults per figure otherwise. */
  x_label?: string;
  y_label?: string;
  log_x?: boolean;
  log_y?: boolean;
  /** Divergence budget 2*eps^2 drawn as a vertical line on CDF figures. */
  threshold?: number;
  title?: string;
}

export function parseFigureSpec(doc: unknown): FigureSpec {
  if (typeof doc !== "object" || doc === null) {
    throw new Error("figure spec must be a JSON object");
  }
  const rec = doc as Record<string, unknown>;
  for (const key of ["csv_path", "figure_id", "output_path"] as const) {
    if (typeof rec[key] !== "string" || rec[key] === "") {
      throw new Error(`figure spec field '${key}' must be a nonempty string`);
    }
  }
  const figureId = rec.figure_id as string;
  if (!FIGURE_IDS.includes(figureId as FigureId)) {
    throw new Error(
      `unknown figure_id '${figureId}'; expected one of ${FIGURE_IDS.join(", ")}`,
    );
  }
  for (const key of ["x_label", "y_label", "title"] as const) {
    if (rec[key] !== undefined && typeof rec[key] !== "string") {
      throw new Error(`figure spec field '${key}' must be a string`);
    }
  }
  for (const key of ["log_x", "log_y"] as const) {
    if (rec[key] !== undefined && typeof rec[key] !== "boolean") {
      throw new Error(`figure spec field '${key}' must be a boolean`);
    }
  }
  if (rec.threshold !== undefined && typeof rec.threshold !== "number") {
    throw new Error("figure spec field 'threshold' must be a number");
  }
  return {
    csv_path: rec.csv_path as string,
    figure_id: figureId as FigureId,
    output_path: rec.output_path as string,
    x_label: rec.x_label as string | undefined,
    y_label: rec.y_label as string | undefined,
    log_x: rec.log_x as boolean | undefined,
    log_y: rec.log_y as boolean | undefined,
    threshold: rec.threshold as number | undefined,
    title: rec.title as string | undefined,
  };
}

/** One aggregated sweep point (a `kind == mean` row). */
export interface MeanPoint {
  method: string;
  klCase: string;
  pTotalDbm: number;
  nTx: number;
  epsilon: number;
  vW: number;
  rateBits: number;
  pFa: number | null;
  pMd: number | null;
}

const SWEEP_COLUMNS = [
  "kind", "method", "kl_case", "p_total_dbm", "n_tx", "epsilon", "v_w",
  "rate_bits", "p_fa", "p_md",
] as const;

export function meanPoints(table: CsvTable, context: string): MeanPoint[] {
  requireColumns(table, SWEEP_COLUMNS, context);
  const points = table.rows
    .filter((r) => r.kind === "mean" && r.rate_bits !== "")
    .map((r) => ({
      method: r.method,
      klCase: r.kl_case,
      pTotalDbm: Number(r.p_total_dbm),
      nTx: Number(r.n_tx),
      epsilon: Number(r.epsilon),
      vW: Number(r.v_w),
      rateBits: Number(r.rate_bits),
      pFa: r.p_fa === "" ? null : Number(r.p_fa),
      pMd: r.p_md === "" ? null : Number(r.p_md),
    }));
  if (points.length === 0) {
    throw new Error(`${context}: CSV contains no aggregated (kind=mean) rows`);
  }
  return points;
}

export interface CdfPoint {
  klValue: number;
  cdf: number;
}

export function cdfPoints(table: CsvTable, context: string): CdfPoint[] {
  requireColumns(table, ["kl_value", "cdf"], context);
  const points = table.rows.map((r) => ({
    klValue: Number(r.kl_value),
    cdf: Number(r.cdf),
  }));
  if (points.length === 0) {
    throw new Error(`${context}: CDF CSV has no data rows`);
  }
  points.sort((a, b) => a.klValue - b.klValue);
  for (let i = 1; i < points.length; i++) {
    if (points[i].cdf + 1e-12 < points[i - 1].cdf) {
      throw new Error(`${context}: CDF column is not nondecreasing`);
    }
  }
  if (Math.abs(points[points.length - 1].cdf - 1.0) > 1e-9) {
    throw new Error(`${context}: CDF does not reach 1`);
  }
  return points;
}

/** Series label for grouping sweep rows: method plus divergence case. */
export function seriesKey(p: MeanPoint): string {
  return p.klCase !== "" && !p.method.includes(p.klCase)
    ? `${p.method}_${p.klCase}`
    : p.method;
}
