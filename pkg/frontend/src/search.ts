/**
 * Random hyperparameter search over a fixed grid of 128 combinations:
 * LSTM units x dropout x batch size x optimizer. Candidates are drawn
 * without replacement from a seeded shuffle, each is trained on the same
 * split, and the best validation frame accuracy wins.
 */

import {
  ModelSpec,
  ConfigError,
  SEARCH_BATCH,
  SEARCH_DROPOUT,
  SEARCH_OPTIMIZERS,
  SEARCH_UNITS,
  defaultModelSpec,
} from './model.js';
import { Sequence, seededShuffle } from './data.js';
import { trainModel } from './train.js';

export function enumerateSearchSpace(): ModelSpec[] {
  const base = defaultModelSpec();
  const specs: ModelSpec[] = [];
  for (const lstmUnits of SEARCH_UNITS) {
    for (const dropout of SEARCH_DROPOUT) {
      for (const batchSize of SEARCH_BATCH) {
        for (const optimizer of SEARCH_OPTIMIZERS) {
          specs.push({ ...base, lstmUnits, dropout, batchSize, optimizer });
        }
      }
    }
  }
  return specs;
}

export interface SearchTrial {
  spec: ModelSpec;
  valAccuracy: number;
  epochs: number;
}

export interface SearchResult {
  best: ModelSpec;
  bestValAccuracy: number;
  trials: SearchTrial[];
}

export interface SearchOptions {
  nTrials?: number;
  seed?: number;
  epochs?: number;
  patience?: number;
  valFraction?: number;
  verbose?: boolean;
}

export async function randomSearch(
  sequences: Sequence[],
  options: SearchOptions = {},
): Promise<SearchResult> {
  const nTrials = options.nTrials ?? 20;
  const seed = options.seed ?? 1;
  if (!Number.isInteger(nTrials) || nTrials < 1) {
    throw new ConfigError('search needs at least one trial');
  }
  const space = seededShuffle(enumerateSearchSpace(), seed);
  const candidates = space.slice(0, Math.min(nTrials, space.length));

  const trials: SearchTrial[] = [];
  let best: ModelSpec | null = null;
  let bestAccuracy = -Infinity;
  for (let i = 0; i < candidates.length; i++) {
    const spec = candidates[i];
    const result = await trainModel(sequences, {
      spec,
      epochs: options.epochs,
      patience: options.patience,
      valFraction: options.valFraction,
      seed,
      verbose: false,
    });
    result.model.dispose();
    trials.push({
      spec,
      valAccuracy: result.bestValAccuracy,
      epochs: result.history.length,
    });
    if (options.verbose) {
      console.log(
        `trial ${String(i + 1).padStart(2)}/${candidates.length}  ` +
          `units=${spec.lstmUnits} dropout=${spec.dropout} batch=${spec.batchSize} ` +
          `${spec.optimizer}  val_acc ${result.bestValAccuracy.toFixed(5)}`,
      );
    }
    if (result.bestValAccuracy > bestAccuracy) {
      bestAccuracy = result.bestValAccuracy;
      best = spec;
    }
  }
  return { best: best!, bestValAccuracy: bestAccuracy, trials };
}
