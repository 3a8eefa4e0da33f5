/**
 * Dataset plumbing for training: pairs trial CSVs with their *_truth.csv
 * event files, builds feature/label sequences, fits per-channel
 * standardization on the training split only, and packs batches padded
 * with zero rows to the longest sequence in the batch.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';
import { loadTrial } from './trial.js';
import { loadEvents } from './events.js';
import { featurize, labelTensor, N_FEATURES, N_CLASSES } from './features.js';
import { ConfigError } from './model.js';

export interface Sequence {
  trialId: string;
  /** frame-major [T, N_FEATURES] */
  features: Float32Array;
  labels: Uint8Array;
  frames: number;
  sampleRate: number;
}

export interface Standardization {
  mean: Float64Array;
  std: Float64Array;
}

export class DataError extends Error {}

/** Small deterministic PRNG, returns floats in [0, 1). */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function seededShuffle<T>(items: T[], seed: number): T[] {
  const rand = mulberry32(seed);
  const out = [...items];
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

/** Trial CSVs in `dir` with matching `<stem>_truth.csv`, sorted by name. */
export function listTrialPairs(dir: string): Array<{ trial: string; truth: string }> {
  let names: string[];
  try {
    names = fs.readdirSync(dir);
  } catch (err) {
    throw new DataError(`cannot list ${dir}: ${String(err)}`);
  }
  const pairs: Array<{ trial: string; truth: string }> = [];
  for (const name of names.sort()) {
    if (!name.endsWith('.csv') || name.endsWith('_truth.csv')) continue;
    const truth = name.replace(/\.csv$/, '_truth.csv');
    if (!names.includes(truth)) {
      throw new DataError(`${name}: no matching ${truth}`);
    }
    pairs.push({ trial: path.join(dir, name), truth: path.join(dir, truth) });
  }
  if (pairs.length === 0) {
    throw new DataError(`no trial CSVs with truth files in ${dir}`);
  }
  return pairs;
}

export function loadSequence(trialPath: string, truthPath: string): Sequence {
  const trial = loadTrial(trialPath);
  const events = loadEvents(truthPath);
  const tensor = featurize(trial);
  return {
    trialId: trial.trialId,
    features: tensor.data,
    labels: labelTensor(events, trial.frames),
    frames: trial.frames,
    sampleRate: trial.sampleRate,
  };
}

export function loadDataset(dir: string): Sequence[] {
  return listTrialPairs(dir).map((p) => loadSequence(p.trial, p.truth));
}

export function splitTrainVal(
  sequences: Sequence[],
  valFraction: number,
  seed: number,
): { train: Sequence[]; val: Sequence[] } {
  if (!(valFraction > 0 && valFraction < 1)) {
    throw new ConfigError('validation fraction must lie strictly between 0 and 1');
  }
  const shuffled = seededShuffle(sequences, seed);
  const nVal = Math.round(shuffled.length * valFraction);
  const val = shuffled.slice(0, nVal);
  const train = shuffled.slice(nVal);
  if (train.length === 0 || val.length === 0) {
    throw new ConfigError(
      `split of ${sequences.length} sequences leaves an empty side ` +
        `(train ${train.length}, val ${val.length})`,
    );
  }
  return { train, val };
}

/** Per-channel mean and std over every frame of the given sequences. */
export function fitStandardization(sequences: Sequence[]): Standardization {
  if (sequences.length === 0) throw new ConfigError('no sequences to standardize on');
  const mean = new Float64Array(N_FEATURES);
  const m2 = new Float64Array(N_FEATURES);
  let count = 0;
  for (const seq of sequences) {
    for (let t = 0; t < seq.frames; t++) {
      count += 1;
      const base = t * N_FEATURES;
      for (let f = 0; f < N_FEATURES; f++) {
        const x = seq.features[base + f];
        const delta = x - mean[f];
        mean[f] += delta / count;
        m2[f] += delta * (x - mean[f]);
      }
    }
  }
  const std = new Float64Array(N_FEATURES);
  for (let f = 0; f < N_FEATURES; f++) {
    const variance = count > 1 ? m2[f] / count : 0;
    const s = Math.sqrt(variance);
    std[f] = s > 1e-12 ? s : 1.0; // constant channel: leave it centred at 0
  }
  return { mean, std };
}

export function standardize(seq: Sequence, st: Standardization): Sequence {
  const out = new Float32Array(seq.features.length);
  for (let t = 0; t < seq.frames; t++) {
    const base = t * N_FEATURES;
    for (let f = 0; f < N_FEATURES; f++) {
      out[base + f] = (seq.features[base + f] - st.mean[f]) / st.std[f];
    }
  }
  return { ...seq, features: out };
}

/** Weights inverse to class frequency, normalized to mean 1. */
export function classWeights(sequences: Sequence[]): Float64Array {
  const counts = new Float64Array(N_CLASSES);
  for (const seq of sequences) for (const c of seq.labels) counts[c] += 1;
  const total = counts.reduce((a, b) => a + b, 0);
  const weights = new Float64Array(N_CLASSES);
  for (let c = 0; c < N_CLASSES; c++) {
    weights[c] = total / (N_CLASSES * Math.max(counts[c], 1));
  }
  return weights;
}

export interface Batch {
  /** [size, maxFrames, N_FEATURES], zero padded */
  x: Float32Array;
  /** [size, maxFrames, N_CLASSES] one-hot, all-zero rows on padding */
  y: Float32Array;
  size: number;
  maxFrames: number;
}

export function padBatch(sequences: Sequence[]): Batch {
  const size = sequences.length;
  const maxFrames = Math.max(...sequences.map((s) => s.frames));
  const x = new Float32Array(size * maxFrames * N_FEATURES);
  const y = new Float32Array(size * maxFrames * N_CLASSES);
  for (let b = 0; b < size; b++) {
    const seq = sequences[b];
    x.set(seq.features, b * maxFrames * N_FEATURES);
    for (let t = 0; t < seq.frames; t++) {
      y[(b * maxFrames + t) * N_CLASSES + seq.labels[t]] = 1;
    }
  }
  return { x, y, size, maxFrames };
}

/**
 * Group into batches of near-equal length (sorted by frame count) so the
 * zero padding stays small, then shuffle the batch order.
 */
export function makeBatches(sequences: Sequence[], batchSize: number, seed: number): Batch[] {
  const sorted = [...sequences].sort((a, b) => a.frames - b.frames);
  const batches: Batch[] = [];
  for (let i = 0; i < sorted.length; i += batchSize) {
    batches.push(padBatch(sorted.slice(i, i + batchSize)));
  }
  return seededShuffle(batches, seed);
}
