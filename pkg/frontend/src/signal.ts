/**
 * Zero-phase Butterworth smoothing and central-difference derivatives.
 *
 * These mirror the evaluator package's documented definitions exactly
 * (order-4 SOS lowpass designed via the bilinear transform, forward-
 * backward pass over an odd-reflected extension of 3*order samples,
 * np.gradient-style derivatives) and are cross-checked against its
 * output on shared fixtures in test/signal.test.ts.
 */

/** One biquad: [b0, b1, b2, a0=1, a1, a2]. */
export type SosSection = [number, number, number, number, number, number];

interface Complex {
  re: number;
  im: number;
}

/**
 * Butterworth lowpass design in second-order sections.
 *
 * Matches scipy.signal.butter(order, cutoffHz, fs=sampleRate,
 * output="sos"): prototype poles warped and mapped with the bilinear
 * transform, zeros at z=-1, conjugate pole pairs per section ordered
 * by increasing pole radius, overall gain folded into the first
 * section's numerator.
 */
export function butterLowpassSos(
  order: number,
  cutoffHz: number,
  sampleRate: number,
): SosSection[] {
  if (order < 2 || order % 2 !== 0) {
    throw new Error(`only even filter orders supported, got ${order}`);
  }
  const nyquist = sampleRate / 2;
  if (!(cutoffHz > 0 && cutoffHz < nyquist)) {
    throw new Error(`cutoff must lie in (0, ${nyquist}) Hz, got ${cutoffHz}`);
  }

  const wn = cutoffHz / nyquist;
  const warped = 4 * Math.tan((Math.PI * wn) / 2);

  // analog prototype poles on the unit circle, scaled to the warped
  // cutoff; keep one pole per conjugate pair (the one with im > 0)
  const poles: Complex[] = [];
  for (let k = 0; k < order / 2; k++) {
    const theta = (Math.PI * (2 * k + 1 + order)) / (2 * order);
    poles.push({ re: warped * Math.cos(theta), im: warped * Math.sin(theta) });
  }

  // bilinear transform z = (4 + p) / (4 - p); overall gain is
  // warped^order * prod(1 / |4 - p|^2) over the full conjugate set
  let gain = Math.pow(warped, order);
  const zPoles: Complex[] = [];
  for (const p of poles) {
    const dre = 4 - p.re;
    const dim = -p.im;
    const denom = dre * dre + dim * dim;
    zPoles.push({
      re: ((4 + p.re) * dre + p.im * dim) / denom,
      im: (p.im * dre - (4 + p.re) * dim) / denom,
    });
    gain /= denom; // (4 - p)(4 - conj(p)) = |4 - p|^2
  }

  // one section per conjugate pair, poles nearest the unit circle last
  zPoles.sort(
    (a, b) => a.re * a.re + a.im * a.im - (b.re * b.re + b.im * b.im),
  );
  const sections: SosSection[] = zPoles.map((p) => [
    1,
    2,
    1,
    1,
    -2 * p.re,
    p.re * p.re + p.im * p.im,
  ]);
  sections[0][0] *= gain;
  sections[0][1] *= gain;
  sections[0][2] *= gain;
  return sections;
}

/** Steady-state filter state per section for a unit-step input. */
function stepInitialState(sections: SosSection[]): Array<[number, number]> {
  const zi: Array<[number, number]> = [];
  let scale = 1;
  for (const [b0, b1, b2, , a1, a2] of sections) {
    const g = (b0 + b1 + b2) / (1 + a1 + a2);
    zi.push([scale * (g - b0), scale * (b2 - a2 * g)]);
    scale *= g;
  }
  return zi;
}

function sosFilterInPlace(
  sections: SosSection[],
  x: Float64Array,
  zi: Array<[number, number]>,
  x0: number,
): void {
  for (let s = 0; s < sections.length; s++) {
    const [b0, b1, b2, , a1, a2] = sections[s];
    let z1 = zi[s][0] * x0;
    let z2 = zi[s][1] * x0;
    for (let n = 0; n < x.length; n++) {
      const xn = x[n];
      const yn = b0 * xn + z1;
      z1 = b1 * xn - a1 * yn + z2;
      z2 = b2 * xn - a2 * yn;
      x[n] = yn;
    }
  }
}

/**
 * Forward-backward filtering with odd edge extension, equivalent to
 * scipy.signal.sosfiltfilt(sos, x, padtype="odd", padlen=3*order).
 */
export function sosFiltFilt(sections: SosSection[], x: ArrayLike<number>): Float64Array {
  const n = x.length;
  const padlen = 3 * (2 * sections.length);
  if (n <= padlen) {
    throw new Error(`series too short to filter: ${n} samples, need > ${padlen}`);
  }
  const ext = new Float64Array(n + 2 * padlen);
  for (let i = 0; i < padlen; i++) {
    ext[i] = 2 * x[0] - x[padlen - i];
    ext[padlen + n + i] = 2 * x[n - 1] - x[n - 2 - i];
  }
  for (let i = 0; i < n; i++) {
    ext[padlen + i] = x[i];
  }

  const zi = stepInitialState(sections);
  sosFilterInPlace(sections, ext, zi, ext[0]);
  ext.reverse();
  sosFilterInPlace(sections, ext, zi, ext[0]);
  ext.reverse();
  return ext.slice(padlen, padlen + n);
}

const SMOOTHING_CUTOFF_HZ = 7.0;
const SMOOTHING_ORDER = 4;

/**
 * The evaluator's marker smoothing: order-4 zero-phase lowpass at 7 Hz.
 * Series too short for the filter's edge extension pass through
 * unchanged (only degenerate fixture-sized inputs hit this).
 */
export function smooth(values: ArrayLike<number>, sampleRate: number): Float64Array {
  if (values.length <= 3 * SMOOTHING_ORDER) {
    return Float64Array.from(values as ArrayLike<number>);
  }
  const sos = butterLowpassSos(SMOOTHING_ORDER, SMOOTHING_CUTOFF_HZ, sampleRate);
  return sosFiltFilt(sos, values);
}

/**
 * First time derivative, matching np.gradient: central differences in
 * the interior, one-sided at the ends.
 */
export function gradient(values: ArrayLike<number>, sampleRate: number): Float64Array {
  const n = values.length;
  if (n < 2) {
    throw new Error(`need at least 2 samples, got ${n}`);
  }
  const dt = 1 / sampleRate;
  const out = new Float64Array(n);
  out[0] = (values[1] - values[0]) / dt;
  out[n - 1] = (values[n - 1] - values[n - 2]) / dt;
  for (let i = 1; i < n - 1; i++) {
    out[i] = (values[i + 1] - values[i - 1]) / (2 * dt);
  }
  return out;
}

/**
 * Indices of strict local maxima above a floor. Plateaus count once,
 * at their center; endpoints never qualify.
 */
export function localMaxima(values: ArrayLike<number>, floor: number): number[] {
  const out: number[] = [];
  const n = values.length;
  let i = 1;
  while (i < n - 1) {
    if (values[i] <= values[i - 1]) {
      i++;
      continue;
    }
    let j = i;
    while (j + 1 < n && values[j + 1] === values[i]) {
      j++;
    }
    if (j < n - 1 && values[j + 1] < values[i] && values[i] > floor) {
      out.push(Math.floor((i + j) / 2));
    }
    i = j + 1;
  }
  return out;
}
