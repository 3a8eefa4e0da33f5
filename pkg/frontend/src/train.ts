/**
 * Training loop and on-disk artifact format.
 *
 * An artifact is a directory of three files: `model.json` (topology and
 * weight specs), `weights.bin`, and `manifest.json` carrying the feature
 * layout version, the exact channel names, the standardization constants
 * fitted on the training split, the model spec, class weights, and seed.
 * Loading refuses any manifest whose layout differs from this build.
 */

import * as tf from '@tensorflow/tfjs';
import * as fs from 'node:fs';
import * as path from 'node:path';
import {
  ModelSpec,
  ConfigError,
  buildModel,
  defaultModelSpec,
  makeOptimizer,
  maskedWeightedLoss,
  validateSpec,
} from './model.js';
import {
  Batch,
  Sequence,
  Standardization,
  classWeights as computeClassWeights,
  fitStandardization,
  makeBatches,
  splitTrainVal,
  standardize,
} from './data.js';
import { FEATURE_LAYOUT_VERSION, N_CLASSES, N_FEATURES, featureNames } from './features.js';

export class ArtifactError extends Error {}
export class LayoutVersionError extends ArtifactError {}

export interface TrainOptions {
  spec?: ModelSpec;
  epochs?: number;
  patience?: number;
  valFraction?: number;
  seed?: number;
  verbose?: boolean;
  /** multiply the learning rate by this after every epoch (default 1) */
  lrDecay?: number;
  /** hold the learning rate flat for this many epochs before decaying */
  decayAfter?: number;
}

export interface EpochLog {
  epoch: number;
  loss: number;
  valAccuracy: number;
  seconds: number;
}

export interface TrainResult {
  model: tf.LayersModel;
  spec: ModelSpec;
  standardization: Standardization;
  classWeights: Float64Array;
  history: EpochLog[];
  bestValAccuracy: number;
  sampleRate: number;
  seed: number;
}

function batchTensors(batch: Batch): { xs: tf.Tensor3D; ys: tf.Tensor3D } {
  return {
    xs: tf.tensor3d(batch.x, [batch.size, batch.maxFrames, N_FEATURES]),
    ys: tf.tensor3d(batch.y, [batch.size, batch.maxFrames, N_CLASSES]),
  };
}

/** Pooled fraction of valid frames classified correctly. */
export function pooledAccuracy(model: tf.LayersModel, batches: Batch[]): number {
  let hits = 0;
  let count = 0;
  for (const batch of batches) {
    const [h, c] = tf.tidy(() => {
      const { xs, ys } = batchTensors(batch);
      const pred = model.apply(xs) as tf.Tensor;
      const valid = tf.sum(ys, -1);
      const match = tf.equal(tf.argMax(ys, -1), tf.argMax(pred, -1)).cast('float32');
      return [
        tf.sum(tf.mul(match, valid)).dataSync()[0],
        tf.sum(valid).dataSync()[0],
      ];
    });
    hits += h;
    count += c;
  }
  return count > 0 ? hits / count : 0;
}

export async function trainModel(
  sequences: Sequence[],
  options: TrainOptions = {},
): Promise<TrainResult> {
  const spec = options.spec ?? defaultModelSpec();
  validateSpec(spec);
  const epochs = options.epochs ?? 40;
  const patience = options.patience ?? 5;
  const valFraction = options.valFraction ?? 0.15;
  const seed = options.seed ?? 1;
  const verbose = options.verbose ?? false;
  const lrDecay = options.lrDecay ?? 1.0;
  const decayAfter = options.decayAfter ?? 0;
  if (epochs < 1) throw new ConfigError('epochs must be at least 1');
  if (!(lrDecay > 0 && lrDecay <= 1)) {
    throw new ConfigError('lrDecay must lie in (0, 1]');
  }
  if (!Number.isInteger(decayAfter) || decayAfter < 0) {
    throw new ConfigError('decayAfter must be a non-negative integer');
  }
  if (sequences.length === 0) throw new ConfigError('no training sequences');
  const sampleRate = sequences[0].sampleRate;
  for (const seq of sequences) {
    if (seq.sampleRate !== sampleRate) {
      throw new ConfigError(
        `mixed sample rates in dataset (${seq.sampleRate} vs ${sampleRate})`,
      );
    }
  }

  const { train, val } = splitTrainVal(sequences, valFraction, seed);
  const standardization = fitStandardization(train);
  const trainStd = train.map((s) => standardize(s, standardization));
  const valStd = val.map((s) => standardize(s, standardization));
  const weights = computeClassWeights(train);

  const model = buildModel(spec, seed);
  const optimizer = makeOptimizer(spec);
  const lossFn = maskedWeightedLoss(weights);
  const valBatches = makeBatches(valStd, spec.batchSize, 0);

  const history: EpochLog[] = [];
  let best = -Infinity;
  let bestWeights: tf.Tensor[] | null = null;
  let sinceBest = 0;
  try {
    for (let epoch = 1; epoch <= epochs; epoch++) {
      const started = Date.now();
      const batches = makeBatches(trainStd, spec.batchSize, seed + epoch);
      let lossSum = 0;
      let seqCount = 0;
      for (const batch of batches) {
        const { xs, ys } = batchTensors(batch);
        const cost = optimizer.minimize(
          () => lossFn(ys, model.apply(xs, { training: true }) as tf.Tensor),
          true,
        )!;
        lossSum += cost.dataSync()[0] * batch.size;
        seqCount += batch.size;
        cost.dispose();
        xs.dispose();
        ys.dispose();
      }
      const loss = lossSum / seqCount;
      const valAccuracy = pooledAccuracy(model, valBatches);
      const seconds = (Date.now() - started) / 1000;
      history.push({ epoch, loss, valAccuracy, seconds });
      if (verbose) {
        console.log(
          `epoch ${String(epoch).padStart(3)}  loss ${loss.toFixed(5)}  ` +
            `val_acc ${valAccuracy.toFixed(5)}  ${seconds.toFixed(1)}s`,
        );
      }
      if (valAccuracy > best + 1e-6) {
        best = valAccuracy;
        sinceBest = 0;
        if (bestWeights) bestWeights.forEach((w) => w.dispose());
        bestWeights = model.getWeights().map((w) => w.clone());
      } else {
        sinceBest += 1;
        if (sinceBest >= patience) {
          if (verbose) console.log(`early stop after epoch ${epoch} (best val_acc ${best.toFixed(5)})`);
          break;
        }
      }
      if (lrDecay < 1 && epoch > decayAfter) {
        (optimizer as any).learningRate *= lrDecay;
      }
    }
    if (bestWeights) {
      model.setWeights(bestWeights);
    }
  } finally {
    if (bestWeights) bestWeights.forEach((w) => w.dispose());
    optimizer.dispose();
  }

  return {
    model,
    spec,
    standardization,
    classWeights: weights,
    history,
    bestValAccuracy: best,
    sampleRate,
    seed,
  };
}

export interface ArtifactManifest {
  layoutVersion: number;
  featureNames: string[];
  sampleRateHz: number;
  standardization: { mean: number[]; std: number[] };
  modelSpec: ModelSpec;
  classWeights: number[];
  seed: number;
  epochsTrained: number;
  valAccuracy: number;
}

export function manifestOf(result: TrainResult): ArtifactManifest {
  return {
    layoutVersion: FEATURE_LAYOUT_VERSION,
    featureNames: featureNames(),
    sampleRateHz: result.sampleRate,
    standardization: {
      mean: Array.from(result.standardization.mean),
      std: Array.from(result.standardization.std),
    },
    modelSpec: result.spec,
    classWeights: Array.from(result.classWeights),
    seed: result.seed,
    epochsTrained: result.history.length,
    valAccuracy: result.bestValAccuracy,
  };
}

export async function saveArtifact(result: TrainResult, dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  let captured: tf.io.ModelArtifacts | null = null;
  await result.model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      captured = artifacts;
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: 'JSON' as const,
        },
      };
    }),
  );
  if (!captured) throw new ArtifactError('model serialization produced nothing');
  const { modelTopology, weightSpecs, weightData } = captured as tf.io.ModelArtifacts;
  const joined = tf.io.CompositeArrayBuffer.join(weightData);
  fs.writeFileSync(
    path.join(dir, 'model.json'),
    JSON.stringify({
      modelTopology,
      weightsManifest: [{ paths: ['weights.bin'], weights: weightSpecs }],
    }),
  );
  fs.writeFileSync(path.join(dir, 'weights.bin'), Buffer.from(joined));
  fs.writeFileSync(
    path.join(dir, 'manifest.json'),
    JSON.stringify(manifestOf(result), null, 2) + '\n',
  );
}

function readJson(filePath: string): any {
  let text: string;
  try {
    text = fs.readFileSync(filePath, 'utf8');
  } catch (err) {
    throw new ArtifactError(`cannot read ${filePath}: ${String(err)}`);
  }
  try {
    return JSON.parse(text);
  } catch (err) {
    throw new ArtifactError(`${filePath} is not valid JSON: ${String(err)}`);
  }
}

export interface LoadedArtifact {
  model: tf.LayersModel;
  manifest: ArtifactManifest;
}

export async function loadArtifact(dir: string): Promise<LoadedArtifact> {
  const manifest = readJson(path.join(dir, 'manifest.json')) as ArtifactManifest;
  if (manifest.layoutVersion !== FEATURE_LAYOUT_VERSION) {
    throw new LayoutVersionError(
      `artifact uses feature layout v${manifest.layoutVersion}, ` +
        `this build expects v${FEATURE_LAYOUT_VERSION}`,
    );
  }
  const expected = featureNames();
  const got = manifest.featureNames ?? [];
  if (got.length !== expected.length || got.some((n, i) => n !== expected[i])) {
    throw new LayoutVersionError('artifact feature channels do not match this build');
  }
  const modelJson = readJson(path.join(dir, 'model.json'));
  let weightBytes: Buffer;
  try {
    weightBytes = fs.readFileSync(path.join(dir, 'weights.bin'));
  } catch (err) {
    throw new ArtifactError(`cannot read weights: ${String(err)}`);
  }
  const weightData = weightBytes.buffer.slice(
    weightBytes.byteOffset,
    weightBytes.byteOffset + weightBytes.byteLength,
  );
  const model = await tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: modelJson.modelTopology,
      weightSpecs: modelJson.weightsManifest[0].weights,
      weightData,
    }),
  );
  return { model, manifest };
}
