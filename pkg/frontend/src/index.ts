export { parseCsv, requireColumns } from "./csv";
export { cdfPoints, FIGURE_IDS, meanPoints, parseFigureSpec, seriesKey } from "./schema";
export type { CdfPoint, FigureId, FigureSpec, MeanPoint } from "./schema";
export { renderFigure } from "./figures";
export { renderSvg } from "./svg";
export type { AxesOptions, Series } from "./svg";
