#!/usr/bin/env node
/** render_figure --spec PATH: read a FigureSpec JSON, emit the SVG. */

import { readFileSync, writeFileSync } from "fs";
import { renderFigure } from "./figures";
import { parseFigureSpec } from "./schema";

export function main(argv: string[]): number {
  const args = [...argv];
  let specPath: string | undefined;
  while (args.length > 0) {
    const arg = args.shift();
    if (arg === "--spec") {
      specPath = args.shift();
    } else if (arg === "--help" || arg === "-h") {
      console.log("usage: render_figure --spec PATH.json");
      return 0;
    } else {
      console.error(`unknown argument: ${arg}`);
      return 2;
    }
  }
  if (!specPath) {
    console.error("usage: render_figure --spec PATH.json");
    return 2;
  }
  try {
    const spec = parseFigureSpec(JSON.parse(readFileSync(specPath, "utf8")));
    const csvText = readFileSync(spec.csv_path, "utf8");
    const svg = renderFigure(spec, csvText);
    writeFileSync(spec.output_path, svg);
    console.log(`wrote ${spec.output_path}`);
    return 0;
  } catch (err) {
    console.error(`render_figure: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
