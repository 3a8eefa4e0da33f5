/**
 * Recurrent sequence labeller: masking -> LSTM -> dropout -> dense ReLU
 * -> per-frame 5-way softmax. Padded frames carry all-zero feature rows
 * (masked) and all-zero label rows, so they contribute nothing to the
 * loss or the accuracy.
 */

import * as tf from '@tensorflow/tfjs';
import { N_FEATURES, N_CLASSES } from './features.js';

export class ConfigError extends Error {}

export const SEARCH_UNITS = [32, 64, 96, 128] as const;
export const SEARCH_DROPOUT = [0.2, 0.3, 0.4, 0.5] as const;
export const SEARCH_BATCH = [16, 32, 64, 128] as const;
export const SEARCH_OPTIMIZERS = ['adam', 'rmsprop'] as const;

export type OptimizerName = (typeof SEARCH_OPTIMIZERS)[number];

export interface ModelSpec {
  lstmUnits: number;
  dropout: number;
  denseUnits: number;
  peakThreshold: number;
  batchSize: number;
  optimizer: OptimizerName;
  learningRate: number;
}

export function defaultModelSpec(): ModelSpec {
  return {
    lstmUnits: 128,
    dropout: 0.3,
    denseUnits: 32,
    peakThreshold: 0.01,
    batchSize: 32,
    optimizer: 'adam',
    learningRate: 1e-3,
  };
}

export function validateSpec(spec: ModelSpec): void {
  if (!SEARCH_UNITS.includes(spec.lstmUnits as any)) {
    throw new ConfigError(`lstmUnits must be one of ${SEARCH_UNITS.join(', ')}`);
  }
  if (!SEARCH_DROPOUT.includes(spec.dropout as any)) {
    throw new ConfigError(`dropout must be one of ${SEARCH_DROPOUT.join(', ')}`);
  }
  if (!SEARCH_BATCH.includes(spec.batchSize as any)) {
    throw new ConfigError(`batchSize must be one of ${SEARCH_BATCH.join(', ')}`);
  }
  if (!SEARCH_OPTIMIZERS.includes(spec.optimizer)) {
    throw new ConfigError(`optimizer must be one of ${SEARCH_OPTIMIZERS.join(', ')}`);
  }
  if (!Number.isInteger(spec.denseUnits) || spec.denseUnits <= 0) {
    throw new ConfigError('denseUnits must be a positive integer');
  }
  if (!(spec.peakThreshold > 0 && spec.peakThreshold < 1)) {
    throw new ConfigError('peakThreshold must lie strictly between 0 and 1');
  }
  if (!(spec.learningRate > 0)) {
    throw new ConfigError('learningRate must be positive');
  }
}

export function buildModel(spec: ModelSpec, seed: number): tf.LayersModel {
  validateSpec(spec);
  const model = tf.sequential();
  model.add(tf.layers.masking({ maskValue: 0, inputShape: [null, N_FEATURES] }));
  model.add(
    tf.layers.lstm({
      units: spec.lstmUnits,
      returnSequences: true,
      kernelInitializer: tf.initializers.glorotUniform({ seed }),
      recurrentInitializer: tf.initializers.orthogonal({ seed: seed + 1 }),
    }),
  );
  model.add(tf.layers.dropout({ rate: spec.dropout, seed: seed + 2 }));
  model.add(
    tf.layers.timeDistributed({
      layer: tf.layers.dense({
        units: spec.denseUnits,
        activation: 'relu',
        kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 3 }),
      }),
    }),
  );
  model.add(
    tf.layers.timeDistributed({
      layer: tf.layers.dense({
        units: N_CLASSES,
        activation: 'softmax',
        kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 4 }),
      }),
    }),
  );
  return model;
}

export function makeOptimizer(spec: ModelSpec): tf.Optimizer {
  if (spec.optimizer === 'adam') return tf.train.adam(spec.learningRate);
  return tf.train.rmsprop(spec.learningRate);
}

/**
 * Class-weighted cross entropy over valid frames. yTrue is one-hot with
 * all-zero rows on padding, so the per-frame weight sum doubles as the
 * validity mask. Returns mean loss per valid frame.
 */
export function maskedWeightedLoss(classWeights: ArrayLike<number>) {
  if (classWeights.length !== N_CLASSES) {
    throw new ConfigError(`need ${N_CLASSES} class weights`);
  }
  const plain = Array.from(classWeights);
  return (yTrue: tf.Tensor, yPred: tf.Tensor): tf.Scalar =>
    tf.tidy(() => {
      const weights = tf.tensor1d(plain, 'float32');
      const logp = tf.log(tf.clipByValue(yPred, 1e-7, 1.0));
      const weighted = tf.mul(tf.mul(yTrue, logp), weights);
      const perFrame = tf.neg(tf.sum(weighted, -1));
      const valid = tf.sum(yTrue, -1); // 1 on real frames, 0 on padding
      const total = tf.sum(tf.mul(perFrame, valid));
      return tf.div(total, tf.maximum(tf.sum(valid), 1)) as tf.Scalar;
    });
}

/** Fraction of valid (non-padding) frames whose argmax matches. */
export function maskedAccuracy(yTrue: tf.Tensor, yPred: tf.Tensor): number {
  return tf.tidy(() => {
    const valid = tf.sum(yTrue, -1);
    const match = tf.equal(tf.argMax(yTrue, -1), tf.argMax(yPred, -1)).cast('float32');
    const hits = tf.sum(tf.mul(match, valid));
    const count = tf.sum(valid);
    return tf.div(hits, tf.maximum(count, 1)).dataSync()[0];
  });
}
