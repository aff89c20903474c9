/** Minimal deterministic axis scales for SVG output. */

export interface Scale {
  (value: number): number;
  readonly domain: [number, number];
  readonly range: [number, number];
  readonly log: boolean;
  ticks(): number[];
}

/** Fixed-precision coordinate formatting so output bytes never depend on
 * floating-point printing quirks across inputs of similar magnitude. */
export function px(value: number): string {
  return value.toFixed(2);
}

function makeScale(
  domain: [number, number],
  range: [number, number],
  log: boolean,
): Scale {
  const [d0, d1] = log ? [Math.log10(domain[0]), Math.log10(domain[1])] : domain;
  const span = d1 - d0 || 1;
  const fn = ((value: number) => {
    const v = log ? Math.log10(value) : value;
    return range[0] + ((v - d0) / span) * (range[1] - range[0]);
  }) as Scale & { domain: [number, number]; range: [number, number]; log: boolean };
  fn.domain = domain;
  fn.range = range;
  fn.log = log;
  fn.ticks = () => (log ? logTicks(domain) : linearTicks(domain));
  return fn;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  return makeScale(domain, range, false);
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  if (domain[0] <= 0 || domain[1] <= 0) {
    throw new RangeError("log scale needs a positive domain");
  }
  return makeScale(domain, range, true);
}

export function linearTicks([lo, hi]: [number, number], count = 6): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = step * mult;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

export function logTicks([lo, hi]: [number, number]): number[] {
  const ticks: number[] = [];
  for (
    let e = Math.ceil(Math.log10(lo) - 1e-9);
    e <= Math.floor(Math.log10(hi) + 1e-9);
    e += 1
  ) {
    ticks.push(Number(Math.pow(10, e).toPrecision(12)));
  }
  if (ticks.length === 0) {
    ticks.push(lo, hi);
  }
  return ticks;
}

/** Deterministic tick-label formatting. */
export function tickLabel(value: number): string {
  if (value !== 0 && (Math.abs(value) >= 1e4 || Math.abs(value) < 1e-3)) {
    const e = Math.floor(Math.log10(Math.abs(value)));
    const m = value / Math.pow(10, e);
    return `${Number(m.toPrecision(3))}e${e}`;
  }
  return `${Number(value.toPrecision(6))}`;
}
