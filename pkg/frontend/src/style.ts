/** All style constants in one place; rendering elsewhere only refers to
 * these, so the output is a pure function of the input rows. */

export const WIDTH = 640;
export const HEIGHT = 440;
export const MARGIN = { top: 24, right: 20, bottom: 48, left: 64 };

/** Color convention: blue for realized quantities (lhs / true curve),
 * orange for the novel bound, purple for existing / structure-agnostic
 * bounds. */
export const COLORS = {
  lhs: "#1f77b4",
  novel: "#ff7f0e",
  existing: "#9467bd",
  reference: "#555555",
  band: "#ff7f0e",
  axis: "#222222",
  grid: "#dddddd",
} as const;

export const BAND_OPACITY = 0.08;
export const LINE_WIDTH = 1.5;
export const POINT_RADIUS = 3.5;
export const FONT = "12px sans-serif";
