import { readFileSync } from "fs";
import { join } from "path";
import { describe, expect, it } from "vitest";
import { parseCsv } from "../src/csv";
import { renderFigure } from "../src/figures";
import { cdfPoints, meanPoints, parseFigureSpec } from "../src/schema";

const FIXTURES = join(__dirname, "fixtures");

function fixture(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf8");
}

function spec(figureId: string, csv: string, extra: Record<string, unknown> = {}) {
  return parseFigureSpec({
    csv_path: join(FIXTURES, csv),
    figure_id: figureId,
    output_path: "/tmp/out.svg",
    ...extra,
  });
}

function seriesLabels(svg: string): string[] {
  return [...svg.matchAll(/class="series" data-label="([^"]*)"/g)].map((m) => m[1]);
}

describe("figure spec validation", () => {
  it("rejects unknown figure ids and missing fields", () => {
    expect(() => parseFigureSpec({ figure_id: "fig9" })).toThrow(/csv_path/);
    expect(() =>
      parseFigureSpec({ csv_path: "x", figure_id: "fig9", output_path: "y" }),
    ).toThrow(/unknown figure_id/);
  });
});

describe("rate-vs-power figure (fig2)", () => {
  it("draws one labeled curve per method on a single axes", () => {
    const svg = renderFigure(spec("fig2", "fig2.csv"), fixture("fig2.csv"));
    expect(svg).toContain("<svg");
    const labels = seriesLabels(svg);
    expect(labels.sort()).toEqual(["discrete", "no_irs", "perfect"]);
    expect(svg.match(/<g transform=/g)?.length).toBe(1);
  });

  it("fails loudly on wrong schema", () => {
    expect(() => renderFigure(spec("fig2", "bad-columns.csv"), fixture("bad-columns.csv")))
      .toThrow(/missing required columns/);
  });

  it("fails loudly on an empty file", () => {
    expect(() => renderFigure(spec("fig2", "empty.csv"), fixture("empty.csv")))
      .toThrow(/empty CSV/);
  });
});

describe("rate-vs-antennas figures (fig3, fig7)", () => {
  it("renders fig3 per-method curves over n_tx", () => {
    const svg = renderFigure(spec("fig3", "fig3.csv"), fixture("fig3.csv"));
    expect(seriesLabels(svg).sort()).toEqual(["no_irs", "perfect"]);
  });

  it("renders fig7 with both divergence cases", () => {
    const svg = renderFigure(spec("fig7", "fig7.csv"), fixture("fig7.csv"));
    expect(seriesLabels(svg).sort()).toEqual(["robust_kl01", "robust_kl10"]);
  });
});

describe("divergence CDF figure (fig4)", () => {
  it("plots a monotone step CDF reaching 1 with the budget line", () => {
    const table = parseCsv(fixture("fig4.csv"));
    const pts = cdfPoints(table, "test");
    for (let i = 1; i < pts.length; i++) {
      expect(pts[i].cdf).toBeGreaterThanOrEqual(pts[i - 1].cdf);
    }
    expect(pts[pts.length - 1].cdf).toBeCloseTo(1.0, 12);
    const svg = renderFigure(spec("fig4", "fig4.csv", { threshold: 0.02 }),
                             fixture("fig4.csv"));
    expect(svg).toContain('class="x-marker"');
    expect(svg).toContain('data-label="empirical CDF"');
    // step path: staircase uses H/V segments
    expect(svg).toMatch(/d="M[^"]*H[^"]*V/);
  });

  it("rejects a non-CDF file", () => {
    expect(() => renderFigure(spec("fig4", "fig2.csv"), fixture("fig2.csv")))
      .toThrow(/missing required columns \[kl_value, cdf\]/);
  });
});

describe("epsilon sweep figure (fig5)", () => {
  it("stacks a rate panel and a probability panel", () => {
    const svg = renderFigure(spec("fig5", "fig5.csv"), fixture("fig5.csv"));
    expect(svg.match(/<g transform=/g)?.length).toBe(2);
    const labels = seriesLabels(svg);
    expect(labels).toContain("robust_kl01");
    expect(labels).toContain("p_fa robust_kl01");
    expect(labels).toContain("p_md robust_kl10");
  });
});

describe("uncertainty sweep figure (fig6)", () => {
  it("uses a log x axis by default and draws both cases", () => {
    const svg = renderFigure(spec("fig6", "fig6.csv"), fixture("fig6.csv"));
    expect(seriesLabels(svg).sort()).toEqual(["robust_kl01", "robust_kl10"]);
    // log ticks at powers of ten within the sweep range
    expect(svg).toContain(">1e-4<");
  });
});

describe("mean-row extraction", () => {
  it("consumes only aggregated rows", () => {
    const table = parseCsv(fixture("fig2.csv"));
    const pts = meanPoints(table, "test");
    const trials = table.rows.filter((r) => r.kind === "trial").length;
    expect(trials).toBeGreaterThan(0);
    expect(pts.length).toBe(9); // 3 methods x 3 power points
    expect(new Set(pts.map((p) => p.method)).size).toBe(3);
  });

  it("renders deterministically", () => {
    const a = renderFigure(spec("fig2", "fig2.csv"), fixture("fig2.csv"));
    const b = renderFigure(spec("fig2", "fig2.csv"), fixture("fig2.csv"));
    expect(a).toBe(b);
  });
});
