/**
 * Inference: featurize one trial, standardize with the constants stored
 * in the artifact, run the network on the unpadded sequence, then pick
 * local maxima above the peak threshold in each event class probability
 * series. Emits the shared events CSV with source "lstm".
 */

import * as tf from '@tensorflow/tfjs';
import { Trial } from './trial.js';
import { EventRecord, Side, EventKind } from './events.js';
import { N_CLASSES, N_FEATURES, featurize } from './features.js';
import { LoadedArtifact } from './train.js';
import { localMaxima } from './signal.js';

export const EVENT_SOURCE = 'lstm';

const CLASS_EVENT: Array<{ side: Side; kind: EventKind } | null> = [
  null,
  { side: 'L', kind: 'HS' },
  { side: 'L', kind: 'TO' },
  { side: 'R', kind: 'HS' },
  { side: 'R', kind: 'TO' },
];

/** Per-frame class probabilities for one trial, frame-major [T, 5]. */
export function predictProbabilities(artifact: LoadedArtifact, trial: Trial): Float32Array {
  const tensor = featurize(trial);
  const { mean, std } = artifact.manifest.standardization;
  const x = new Float32Array(tensor.data.length);
  for (let t = 0; t < tensor.frames; t++) {
    const base = t * N_FEATURES;
    for (let f = 0; f < N_FEATURES; f++) {
      x[base + f] = (tensor.data[base + f] - mean[f]) / std[f];
    }
  }
  return tf.tidy(() => {
    const xs = tf.tensor3d(x, [1, tensor.frames, N_FEATURES]);
    const probs = artifact.model.predict(xs) as tf.Tensor;
    return probs.dataSync() as Float32Array;
  });
}

export function eventsFromProbabilities(
  probs: Float32Array,
  frames: number,
  sampleRate: number,
  threshold: number,
): EventRecord[] {
  const events: EventRecord[] = [];
  const series = new Float64Array(frames);
  for (let c = 1; c < N_CLASSES; c++) {
    for (let t = 0; t < frames; t++) series[t] = probs[t * N_CLASSES + c];
    const { side, kind } = CLASS_EVENT[c]!;
    for (const frame of localMaxima(series, threshold)) {
      events.push({ side, kind, frame, time: frame / sampleRate, source: EVENT_SOURCE });
    }
  }
  events.sort((a, b) => a.time - b.time);
  return events;
}

export function predictEvents(artifact: LoadedArtifact, trial: Trial): EventRecord[] {
  const probs = predictProbabilities(artifact, trial);
  return eventsFromProbabilities(
    probs,
    trial.frames,
    trial.sampleRate,
    artifact.manifest.modelSpec.peakThreshold,
  );
}
