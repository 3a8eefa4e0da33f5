/**
 * Per-frame feature and label tensors for the sequence labeller.
 *
 * Layout version 1, 54 channels per frame:
 *   0..23   raw marker positions, 8 markers x (x, y, z)
 *   24..47  marker velocities, central difference of the 7 Hz
 *           zero-phase smoothed positions (matches the marker toolkit)
 *   48..53  left then right heel position relative to the pelvis
 *           centroid (mean of the four pelvis markers)
 *
 * Labels: one class id per frame, 0 = no event, then LHS, LTO, RHS,
 * RTO at the exact event frames.
 */

import { Trial, markerColumn, MissingMarkerError } from './trial.js';
import { EventRecord } from './events.js';
import { smooth, gradient } from './signal.js';

export const FEATURE_LAYOUT_VERSION = 1;

export const MARKERS = [
  'LASIS',
  'LPSIS',
  'RASIS',
  'RPSIS',
  'LFCC',
  'LFMT2',
  'RFCC',
  'RFMT2',
] as const;

const AXES = ['x', 'y', 'z'] as const;

export const N_FEATURES = MARKERS.length * 6 + 6; // 54

export const N_CLASSES = 5;
export const CLASS_NAMES = ['none', 'LHS', 'LTO', 'RHS', 'RTO'] as const;

export function featureNames(): string[] {
  const names: string[] = [];
  for (const m of MARKERS) for (const a of AXES) names.push(`${m}_pos_${a}`);
  for (const m of MARKERS) for (const a of AXES) names.push(`${m}_vel_${a}`);
  for (const side of ['L', 'R']) {
    for (const a of AXES) names.push(`${side}FCC_rel_pelvis_${a}`);
  }
  return names;
}

export interface FeatureTensor {
  /** frame-major [T, N_FEATURES] */
  data: Float32Array;
  frames: number;
  sampleRate: number;
  trialId: string;
}

export function featurize(trial: Trial): FeatureTensor {
  for (const m of MARKERS) {
    if (!trial.markers.has(m)) {
      throw new MissingMarkerError(`${trial.trialId}: missing marker: ${m}`);
    }
  }
  const T = trial.frames;
  const data = new Float32Array(T * N_FEATURES);
  const pos: Float64Array[] = [];
  for (let mi = 0; mi < MARKERS.length; mi++) {
    for (let a = 0; a < 3; a++) {
      const column = markerColumn(trial, MARKERS[mi], a);
      pos.push(column);
      const f = mi * 3 + a;
      for (let t = 0; t < T; t++) data[t * N_FEATURES + f] = column[t];
      // velocity of the smoothed track; too-short trials skip smoothing
      const vel = T >= 2 ? gradient(smooth(column, trial.sampleRate), trial.sampleRate) : new Float64Array(T);
      const fv = 24 + mi * 3 + a;
      for (let t = 0; t < T; t++) data[t * N_FEATURES + fv] = vel[t];
    }
  }
  // heel relative to pelvis centroid; pelvis markers are layout 0..3,
  // LFCC is marker 4, RFCC is marker 6
  for (let t = 0; t < T; t++) {
    for (let a = 0; a < 3; a++) {
      const centroid =
        (pos[0 * 3 + a][t] + pos[1 * 3 + a][t] + pos[2 * 3 + a][t] + pos[3 * 3 + a][t]) / 4;
      data[t * N_FEATURES + 48 + a] = pos[4 * 3 + a][t] - centroid;
      data[t * N_FEATURES + 51 + a] = pos[6 * 3 + a][t] - centroid;
    }
  }
  return { data, frames: T, sampleRate: trial.sampleRate, trialId: trial.trialId };
}

export function classOf(event: EventRecord): number {
  if (event.side === 'L') return event.kind === 'HS' ? 1 : 2;
  return event.kind === 'HS' ? 3 : 4;
}

/** One class id per frame; events outside [0, frames) are rejected. */
export function labelTensor(events: EventRecord[], frames: number): Uint8Array {
  const labels = new Uint8Array(frames); // zeros: no event
  for (const e of events) {
    if (e.frame < 0 || e.frame >= frames) {
      throw new RangeError(`event frame ${e.frame} outside trial of ${frames} frames`);
    }
    labels[e.frame] = classOf(e);
  }
  return labels;
}
