import * as fs from "node:fs";

import { MissingFileError, SchemaMismatchError } from "./errors.js";
import { FigureTag, Row, parseFigureCsv } from "./schema.js";
import { Scale, linearScale, logScale, px, tickLabel } from "./scales.js";
import {
  BAND_OPACITY,
  COLORS,
  FONT,
  HEIGHT,
  LINE_WIDTH,
  MARGIN,
  POINT_RADIUS,
  WIDTH,
} from "./style.js";

export interface PlotSpec {
  figure: FigureTag;
  inputCsv: string;
  output: string;
}

const PLOT_X: [number, number] = [MARGIN.left, WIDTH - MARGIN.right];
const PLOT_Y: [number, number] = [HEIGHT - MARGIN.bottom, MARGIN.top];

function num(row: Row, column: string): number {
  return row[column] as number;
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!Number.isFinite(lo)) {
    throw new SchemaMismatchError("no finite values to plot");
  }
  return lo === hi ? [lo - 1, hi + 1] : [lo, hi];
}

function pad([lo, hi]: [number, number], frac = 0.05): [number, number] {
  const d = (hi - lo) * frac;
  return [lo - d, hi + d];
}

function polyline(
  points: Array<[number, number]>,
  color: string,
  dash = "",
  width = LINE_WIDTH,
): string {
  const attr = dash ? ` stroke-dasharray="${dash}"` : "";
  const coords = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
  return `<polyline fill="none" stroke="${color}" stroke-width="${width}"${attr} points="${coords}"/>`;
}

function axes(x: Scale, y: Scale, xLabel: string, yLabel: string): string {
  const parts: string[] = [];
  const [x0, x1] = x.range;
  const [y0, y1] = y.range;
  for (const t of x.ticks()) {
    const xt = x(t);
    if (xt < x0 - 0.5 || xt > x1 + 0.5) continue;
    parts.push(
      `<line x1="${px(xt)}" y1="${px(y0)}" x2="${px(xt)}" y2="${px(y1)}" stroke="${COLORS.grid}"/>`,
      `<text x="${px(xt)}" y="${px(y0 + 18)}" text-anchor="middle">${tickLabel(t)}</text>`,
    );
  }
  for (const t of y.ticks()) {
    const yt = y(t);
    if (yt > y0 + 0.5 || yt < y1 - 0.5) continue;
    parts.push(
      `<line x1="${px(x0)}" y1="${px(yt)}" x2="${px(x1)}" y2="${px(yt)}" stroke="${COLORS.grid}"/>`,
      `<text x="${px(x0 - 6)}" y="${px(yt + 4)}" text-anchor="end">${tickLabel(t)}</text>`,
    );
  }
  parts.push(
    `<line x1="${px(x0)}" y1="${px(y0)}" x2="${px(x1)}" y2="${px(y0)}" stroke="${COLORS.axis}"/>`,
    `<line x1="${px(x0)}" y1="${px(y0)}" x2="${px(x0)}" y2="${px(y1)}" stroke="${COLORS.axis}"/>`,
    `<text x="${px((x0 + x1) / 2)}" y="${px(y0 + 38)}" text-anchor="middle">${xLabel}</text>`,
    `<text x="14" y="${px((y0 + y1) / 2)}" text-anchor="middle" transform="rotate(-90 14 ${px((y0 + y1) / 2)})">${yLabel}</text>`,
  );
  return parts.join("\n");
}

function legend(entries: Array<[string, string, string]>): string {
  const x0 = WIDTH - MARGIN.right - 180;
  return entries
    .map(([label, color, dash], i) => {
      const y = MARGIN.top + 14 + 16 * i;
      const attr = dash ? ` stroke-dasharray="${dash}"` : "";
      return (
        `<line x1="${px(x0)}" y1="${px(y)}" x2="${px(x0 + 24)}" y2="${px(y)}" stroke="${color}" stroke-width="${LINE_WIDTH}"${attr}/>` +
        `<text x="${px(x0 + 30)}" y="${px(y + 4)}">${label}</text>`
      );
    })
    .join("\n");
}

function svg(body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font="${FONT}" font-size="12" font-family="sans-serif">\n` +
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>\n` +
    body +
    "\n</svg>\n"
  );
}

function groupBy(rows: Row[], column: string): Map<number | string, Row[]> {
  const groups = new Map<number | string, Row[]>();
  for (const row of rows) {
    const key = row[column];
    const list = groups.get(key);
    if (list) list.push(row);
    else groups.set(key, [row]);
  }
  return groups;
}

function renderFig1(rows: Row[]): string {
  const ys = rows.flatMap((r) => [
    num(r, "g_hat") - num(r, "band_halfwidth"),
    num(r, "g_hat") + num(r, "band_halfwidth"),
    num(r, "g_true"),
  ]);
  const x = linearScale([-1, 1], PLOT_X);
  const y = linearScale(pad(extent(ys)), PLOT_Y);
  const parts: string[] = [axes(x, y, "u", "output")];
  const runs = [...groupBy(rows, "run").values()];
  for (const run of runs) {
    const upper = run.map((r): [number, number] => [
      x(num(r, "u")),
      y(num(r, "g_hat") + num(r, "band_halfwidth")),
    ]);
    const lower = run
      .slice()
      .reverse()
      .map((r): [number, number] => [
        x(num(r, "u")),
        y(num(r, "g_hat") - num(r, "band_halfwidth")),
      ]);
    const coords = [...upper, ...lower].map(([a, b]) => `${px(a)},${px(b)}`).join(" ");
    parts.push(
      `<polygon fill="${COLORS.band}" fill-opacity="${BAND_OPACITY}" stroke="none" points="${coords}"/>`,
    );
  }
  parts.push(
    polyline(
      runs[0].map((r) => [x(num(r, "u")), y(num(r, "g_true"))]),
      COLORS.lhs,
      "",
      2,
    ),
    legend([
      ["true response", COLORS.lhs, ""],
      ["confidence bands", COLORS.band, ""],
    ]),
  );
  return svg(parts.join("\n"));
}

function meanBy(rows: Row[], key: string, column: string): Array<[number, number]> {
  return [...groupBy(rows, key).entries()]
    .map(([k, group]): [number, number] => [
      k as number,
      group.reduce((acc, r) => acc + num(r, column), 0) / group.length,
    ])
    .sort((a, b) => a[0] - b[0]);
}

function renderFig2(rows: Row[]): string {
  const lhs = meanBy(rows, "c_theta", "lhs");
  const b2 = meanBy(rows, "c_theta", "beta_thm2");
  const bex = meanBy(rows, "c_theta", "beta_existing");
  const x = logScale(extent(rows.map((r) => num(r, "c_theta"))), PLOT_X);
  const y = linearScale(
    pad(extent([...lhs, ...b2, ...bex].map(([, v]) => v))),
    PLOT_Y,
  );
  const line = (pts: Array<[number, number]>, color: string, dash = "") =>
    polyline(pts.map(([cx, cy]): [number, number] => [x(cx), y(cy)]), color, dash);
  return svg(
    [
      axes(x, y, "prior radius", "parameter error / radius"),
      line(lhs, COLORS.lhs),
      line(b2, COLORS.novel),
      line(bex, COLORS.existing),
      legend([
        ["realized error (mean)", COLORS.lhs, ""],
        ["new radius", COLORS.novel, ""],
        ["existing radius", COLORS.existing, ""],
      ]),
    ].join("\n"),
  );
}

function renderFig3(rows: Row[]): string {
  const deltas = rows.map((r) => num(r, "delta"));
  const hi = Math.max(...deltas, ...rows.map((r) => num(r, "rate")));
  const x = linearScale([0, hi * 1.05], PLOT_X);
  const y = linearScale([0, hi * 1.05], PLOT_Y);
  const parts: string[] = [axes(x, y, "confidence level", "violation rate")];
  parts.push(
    `<line class="reference" x1="${px(x(0))}" y1="${px(y(0))}" x2="${px(x(hi))}" y2="${px(y(hi))}" stroke="${COLORS.reference}" stroke-dasharray="4 3"/>`,
  );
  for (const row of rows) {
    const color = row.method === "THM2" ? COLORS.novel : COLORS.existing;
    parts.push(
      `<circle class="rate-point" cx="${px(x(num(row, "delta")))}" cy="${px(y(num(row, "rate")))}" r="${POINT_RADIUS}" fill="${color}"/>`,
    );
  }
  parts.push(
    legend([
      ["new radius", COLORS.novel, ""],
      ["existing radius", COLORS.existing, ""],
      ["rate = level", COLORS.reference, "4 3"],
    ]),
  );
  return svg(parts.join("\n"));
}

function finiteSeries(rows: Row[], method: string, column: string): Array<[number, number]> {
  return rows
    .filter((r) => r.method === method && Number.isFinite(num(r, column)) && num(r, column) > 0)
    .map((r): [number, number] => [num(r, "t"), num(r, column)])
    .sort((a, b) => a[0] - b[0]);
}

function renderFig4(rows: Row[]): string {
  const series: Array<[Array<[number, number]>, string, string, string]> = [
    [finiteSeries(rows, "STRUCTURED", "lhs"), COLORS.lhs, "", "realized error (structured)"],
    [finiteSeries(rows, "LTI_FR", "lhs"), COLORS.lhs, "4 3", "realized error (LTI)"],
    [finiteSeries(rows, "STRUCTURED", "rhs"), COLORS.novel, "", "structured bound"],
    [finiteSeries(rows, "LTI_FR", "rhs"), COLORS.existing, "", "LTI bound (Frobenius)"],
    [finiteSeries(rows, "LTI_OP", "rhs"), COLORS.existing, "4 3", "LTI bound (operator)"],
  ];
  const values = series.flatMap(([pts]) => pts.map(([, v]) => v));
  const times = series.flatMap(([pts]) => pts.map(([t]) => t));
  const x = logScale(extent(times), PLOT_X);
  const y = logScale(extent(values), PLOT_Y);
  const parts: string[] = [axes(x, y, "time step", "worst-case prediction error")];
  for (const [pts, color, dash] of series) {
    if (pts.length > 1) {
      parts.push(
        polyline(pts.map(([t, v]): [number, number] => [x(t), y(v)]), color, dash),
      );
    }
  }
  parts.push(legend(series.map(([, color, dash, label]) => [label, color, dash])));
  return svg(parts.join("\n"));
}

const RENDERERS: Record<FigureTag, (rows: Row[]) => string> = {
  FIG1: renderFig1,
  FIG2: renderFig2,
  FIG3: renderFig3,
  FIG4: renderFig4,
};

/** Pure rendering: rows in, SVG text out. */
export function renderRows(figure: FigureTag, rows: Row[]): string {
  if (rows.length === 0) {
    throw new SchemaMismatchError("no data rows");
  }
  return RENDERERS[figure](rows);
}

/** Read, validate, render, and only then write the output file. */
export function renderFile(spec: PlotSpec): void {
  if (!fs.existsSync(spec.inputCsv)) {
    throw new MissingFileError(`input file not found: ${spec.inputCsv}`);
  }
  const text = fs.readFileSync(spec.inputCsv, "utf-8");
  const image = renderRows(spec.figure, parseFigureCsv(text, spec.figure));
  fs.writeFileSync(spec.output, image);
}
