/** Figure assembly: map a FigureSpec plus its CSV onto SVG panels. */

import { parseCsv } from "./csv";
import { cdfPoints, FigureSpec, MeanPoint, meanPoints, seriesKey } from "./schema";
import { renderSvg, Series } from "./svg";

function groupSeries(points: MeanPoint[], xOf: (p: MeanPoint) => number,
                     yOf: (p: MeanPoint) => number | null): Series[] {
  const byKey = new Map<string, MeanPoint[]>();
  for (const p of points) {
    const key = seriesKey(p);
    const list = byKey.get(key) ?? [];
    list.push(p);
    byKey.set(key, list);
  }
  const series: Series[] = [];
  for (const [label, pts] of [...byKey.entries()].sort()) {
    const usable = pts
      .map((p) => ({ x: xOf(p), y: yOf(p) }))
      .filter((d): d is { x: number; y: number } => d.y !== null)
      .sort((a, b) => a.x - b.x);
    if (usable.length > 0) {
      series.push({ label, x: usable.map((d) => d.x), y: usable.map((d) => d.y) });
    }
  }
  if (series.length === 0) {
    throw new Error("no plottable series found in CSV");
  }
  return series;
}

export function renderFigure(spec: FigureSpec, csvText: string): string {
  const table = parseCsv(csvText);
  const ctx = `figure ${spec.figure_id}`;

  if (spec.figure_id === "fig4") {
    const pts = cdfPoints(table, ctx);
    const series: Series[] = [{
      label: "empirical CDF",
      x: pts.map((p) => p.klValue),
      y: pts.map((p) => p.cdf),
      kind: "step",
    }];
    return renderSvg([{
      series,
      opts: {
        xLabel: spec.x_label ?? "divergence (nats)",
        yLabel: spec.y_label ?? "empirical CDF",
        title: spec.title ?? "Sampled divergence over the channel-error ellipsoids",
        logX: spec.log_x ?? false,
        xMarker: spec.threshold ?? 0.02,
        xMarkerLabel: "budget",
      },
    }]);
  }

  const points = meanPoints(table, ctx);
  switch (spec.figure_id) {
    case "fig2": {
      const series = groupSeries(points, (p) => p.pTotalDbm, (p) => p.rateBits);
      return renderSvg([{
        series,
        opts: {
          xLabel: spec.x_label ?? "transmit power budget (dBm)",
          yLabel: spec.y_label ?? "rate (bits/s/Hz)",
          title: spec.title ?? "Covert rate vs transmit power",
          logY: spec.log_y ?? false,
        },
      }]);
    }
    case "fig3":
    case "fig7": {
      const series = groupSeries(points, (p) => p.nTx, (p) => p.rateBits);
      return renderSvg([{
        series,
        opts: {
          xLabel: spec.x_label ?? "transmit antennas",
          yLabel: spec.y_label ?? "rate (bits/s/Hz)",
          title: spec.title ?? (spec.figure_id === "fig3"
            ? "Covert rate vs antenna count"
            : "Robust covert rate vs antenna count"),
          logY: spec.log_y ?? false,
        },
      }]);
    }
    case "fig5": {
      const rate = groupSeries(points, (p) => p.epsilon, (p) => p.rateBits);
      const probs: Series[] = [];
      for (const s of groupSeries(points, (p) => p.epsilon, (p) => p.pFa)) {
        probs.push({ ...s, label: `p_fa ${s.label}` });
      }
      for (const s of groupSeries(points, (p) => p.epsilon, (p) => p.pMd)) {
        probs.push({ ...s, label: `p_md ${s.label}` });
      }
      return renderSvg([
        {
          series: rate,
          opts: {
            xLabel: spec.x_label ?? "covertness budget epsilon",
            yLabel: spec.y_label ?? "rate (bits/s/Hz)",
            title: spec.title ?? "Robust covert rate vs epsilon",
          },
        },
        {
          series: probs,
          opts: {
            xLabel: spec.x_label ?? "covertness budget epsilon",
            yLabel: "detection error probability",
            title: "Warden false alarm / missed detection vs epsilon",
          },
        },
      ]);
    }
    case "fig6": {
      const series = groupSeries(points, (p) => p.vW, (p) => p.rateBits);
      return renderSvg([{
        series,
        opts: {
          xLabel: spec.x_label ?? "channel-error size v_w",
          yLabel: spec.y_label ?? "rate (bits/s/Hz)",
          title: spec.title ?? "Robust covert rate vs channel uncertainty",
          logX: spec.log_x ?? true,
        },
      }]);
    }
    default:
      throw new Error(`unhandled figure_id ${spec.figure_id}`);
  }
}
