#!/usr/bin/env node
/**
 * gaitevents-lstm: train, search, and predict subcommands around the
 * recurrent event labeller. Exit codes: 0 success, 2 bad usage, config,
 * or unreadable input, 3 unexpected runtime failure.
 */

import { parseArgs } from 'node:util';
import * as fs from 'node:fs';
import * as path from 'node:path';
import { initBackend } from './backend.js';
import { loadTrial, TrialFormatError, MissingMarkerError } from './trial.js';
import { writeEvents, EventFormatError } from './events.js';
import { FEATURE_LAYOUT_VERSION } from './features.js';
import { ConfigError, ModelSpec, OptimizerName, defaultModelSpec } from './model.js';
import { DataError, loadDataset } from './data.js';
import {
  ArtifactError,
  loadArtifact,
  saveArtifact,
  trainModel,
} from './train.js';
import { randomSearch } from './search.js';
import { predictEvents } from './predict.js';

const VERSION = '0.1.0';

const USAGE = `usage: gaitevents-lstm <command> ...

commands:
  train    --data DIR --out DIR [--epochs N] [--patience N] [--seed N]
           [--val-fraction F] [--units N] [--dropout F] [--batch N]
           [--optimizer adam|rmsprop] [--learning-rate F] [--lr-decay F]
           [--lr-decay-after N] [--threshold F] [--backend wasm|cpu] [--quiet]
  predict  --model DIR (--input TRIAL.csv --out EVENTS.csv |
           --input-dir DIR --out-dir DIR) [--threshold F] [--backend B]
  search   --data DIR [--trials N] [--seed N] [--epochs N] [--patience N]
           [--val-fraction F] [--out RESULT.json] [--backend B] [--quiet]

common:
  --version  print format versions and exit
  --help     this text
`;

class UsageError extends Error {}

function intArg(raw: string | undefined, name: string, fallback: number): number {
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isInteger(value)) throw new UsageError(`--${name} must be an integer`);
  return value;
}

function floatArg(raw: string | undefined, name: string, fallback: number): number {
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isFinite(value)) throw new UsageError(`--${name} must be a number`);
  return value;
}

function specFromArgs(values: Record<string, any>): ModelSpec {
  const spec = defaultModelSpec();
  spec.lstmUnits = intArg(values.units, 'units', spec.lstmUnits);
  spec.dropout = floatArg(values.dropout, 'dropout', spec.dropout);
  spec.batchSize = intArg(values.batch, 'batch', spec.batchSize);
  if (values.optimizer !== undefined) spec.optimizer = values.optimizer as OptimizerName;
  spec.learningRate = floatArg(values['learning-rate'], 'learning-rate', spec.learningRate);
  spec.peakThreshold = floatArg(values.threshold, 'threshold', spec.peakThreshold);
  return spec;
}

async function cmdTrain(argv: string[]): Promise<void> {
  const { values } = parseArgs({
    args: argv,
    options: {
      data: { type: 'string' },
      out: { type: 'string' },
      epochs: { type: 'string' },
      patience: { type: 'string' },
      'val-fraction': { type: 'string' },
      seed: { type: 'string' },
      units: { type: 'string' },
      dropout: { type: 'string' },
      batch: { type: 'string' },
      optimizer: { type: 'string' },
      'learning-rate': { type: 'string' },
      'lr-decay': { type: 'string' },
      'lr-decay-after': { type: 'string' },
      threshold: { type: 'string' },
      backend: { type: 'string' },
      quiet: { type: 'boolean', default: false },
    },
  });
  if (!values.data || !values.out) throw new UsageError('train needs --data and --out');
  const backend = await initBackend(values.backend);
  const sequences = loadDataset(values.data);
  if (!values.quiet) {
    console.log(`backend ${backend}, ${sequences.length} sequence(s) from ${values.data}`);
  }
  const result = await trainModel(sequences, {
    spec: specFromArgs(values),
    epochs: intArg(values.epochs, 'epochs', 40),
    patience: intArg(values.patience, 'patience', 5),
    valFraction: floatArg(values['val-fraction'], 'val-fraction', 0.15),
    seed: intArg(values.seed, 'seed', 1),
    verbose: !values.quiet,
    lrDecay: floatArg(values['lr-decay'], 'lr-decay', 1.0),
    decayAfter: intArg(values['lr-decay-after'], 'lr-decay-after', 0),
  });
  await saveArtifact(result, values.out);
  console.log(
    `trained ${result.history.length} epoch(s), best val_acc ` +
      `${result.bestValAccuracy.toFixed(5)}, artifact in ${values.out}`,
  );
}

async function cmdPredict(argv: string[]): Promise<void> {
  const { values } = parseArgs({
    args: argv,
    options: {
      model: { type: 'string' },
      input: { type: 'string' },
      out: { type: 'string' },
      'input-dir': { type: 'string' },
      'out-dir': { type: 'string' },
      threshold: { type: 'string' },
      backend: { type: 'string' },
    },
  });
  if (!values.model) throw new UsageError('predict needs --model');
  const single = values.input !== undefined;
  const batch = values['input-dir'] !== undefined;
  if (single === batch) {
    throw new UsageError('predict needs either --input/--out or --input-dir/--out-dir');
  }
  if (single && !values.out) throw new UsageError('--input needs --out');
  if (batch && !values['out-dir']) throw new UsageError('--input-dir needs --out-dir');
  await initBackend(values.backend);
  const artifact = await loadArtifact(values.model);
  if (values.threshold !== undefined) {
    const t = floatArg(values.threshold, 'threshold', NaN);
    if (!(t > 0 && t < 1)) throw new UsageError('--threshold must lie strictly between 0 and 1');
    artifact.manifest.modelSpec.peakThreshold = t;
  }

  const jobs: Array<{ input: string; output: string }> = [];
  if (single) {
    jobs.push({ input: values.input!, output: values.out! });
  } else {
    const dir = values['input-dir']!;
    const outDir = values['out-dir']!;
    let names: string[];
    try {
      names = fs.readdirSync(dir).sort();
    } catch (err) {
      throw new DataError(`cannot list ${dir}: ${String(err)}`);
    }
    for (const name of names) {
      if (!name.endsWith('.csv')) continue;
      if (name.endsWith('_truth.csv') || name.endsWith('_events.csv')) continue;
      jobs.push({
        input: path.join(dir, name),
        output: path.join(outDir, name.replace(/\.csv$/, '_events.csv')),
      });
    }
    if (jobs.length === 0) throw new DataError(`no trial CSVs in ${dir}`);
    fs.mkdirSync(outDir, { recursive: true });
  }

  let warnedRate = false;
  for (const job of jobs) {
    const trial = loadTrial(job.input);
    if (trial.sampleRate !== artifact.manifest.sampleRateHz && !warnedRate) {
      console.error(
        `warning: trial sample rate ${trial.sampleRate} Hz differs from ` +
          `training rate ${artifact.manifest.sampleRateHz} Hz`,
      );
      warnedRate = true;
    }
    const events = predictEvents(artifact, trial);
    writeEvents(events, job.output);
    console.log(`${path.basename(job.input)}: ${events.length} event(s) -> ${job.output}`);
  }
  artifact.model.dispose();
}

async function cmdSearch(argv: string[]): Promise<void> {
  const { values } = parseArgs({
    args: argv,
    options: {
      data: { type: 'string' },
      trials: { type: 'string' },
      seed: { type: 'string' },
      epochs: { type: 'string' },
      patience: { type: 'string' },
      'val-fraction': { type: 'string' },
      out: { type: 'string' },
      backend: { type: 'string' },
      quiet: { type: 'boolean', default: false },
    },
  });
  if (!values.data) throw new UsageError('search needs --data');
  const backend = await initBackend(values.backend);
  const sequences = loadDataset(values.data);
  if (!values.quiet) {
    console.log(`backend ${backend}, ${sequences.length} sequence(s) from ${values.data}`);
  }
  const result = await randomSearch(sequences, {
    nTrials: intArg(values.trials, 'trials', 20),
    seed: intArg(values.seed, 'seed', 1),
    epochs: values.epochs !== undefined ? intArg(values.epochs, 'epochs', 0) : undefined,
    patience: values.patience !== undefined ? intArg(values.patience, 'patience', 0) : undefined,
    valFraction:
      values['val-fraction'] !== undefined
        ? floatArg(values['val-fraction'], 'val-fraction', 0)
        : undefined,
    verbose: !values.quiet,
  });
  const b = result.best;
  console.log(
    `best: units=${b.lstmUnits} dropout=${b.dropout} batch=${b.batchSize} ` +
      `${b.optimizer} (val_acc ${result.bestValAccuracy.toFixed(5)})`,
  );
  if (values.out) {
    fs.writeFileSync(values.out, JSON.stringify(result, null, 2) + '\n');
    console.log(`search log -> ${values.out}`);
  }
}

export async function main(argv: string[]): Promise<number> {
  if (argv.includes('--version')) {
    console.log(`gaitevents-lstm ${VERSION} (feature-layout=${FEATURE_LAYOUT_VERSION}, events-csv=1)`);
    return 0;
  }
  const [command, ...rest] = argv;
  if (!command || command === '--help' || command === 'help') {
    process.stdout.write(USAGE);
    return command ? 0 : 2;
  }
  try {
    if (command === 'train') await cmdTrain(rest);
    else if (command === 'predict') await cmdPredict(rest);
    else if (command === 'search') await cmdSearch(rest);
    else throw new UsageError(`unknown command: ${command} (try train, predict, search)`);
    return 0;
  } catch (err) {
    if (
      err instanceof UsageError ||
      err instanceof ConfigError ||
      err instanceof ArtifactError ||
      err instanceof DataError ||
      err instanceof TrialFormatError ||
      err instanceof EventFormatError ||
      err instanceof MissingMarkerError ||
      (err instanceof TypeError && (err as any).code?.startsWith?.('ERR_PARSE_ARGS'))
    ) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    console.error(err instanceof Error ? err.stack ?? err.message : String(err));
    return 3;
  }
}

const entry = process.argv[1] ? path.resolve(process.argv[1]) : '';
if (entry && import.meta.url.endsWith(path.basename(entry))) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
