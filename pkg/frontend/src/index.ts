export { initBackend } from './backend.js';
export {
  Trial,
  MarkerSeries,
  TrialFormatError,
  MissingMarkerError,
  parseTrialCsv,
  loadTrial,
  markerColumn,
} from './trial.js';
export {
  EventRecord,
  Side,
  EventKind,
  EventFormatError,
  parseEvents,
  serializeEvents,
  loadEvents,
  writeEvents,
} from './events.js';
export {
  FEATURE_LAYOUT_VERSION,
  MARKERS,
  N_FEATURES,
  N_CLASSES,
  CLASS_NAMES,
  FeatureTensor,
  featureNames,
  featurize,
  classOf,
  labelTensor,
} from './features.js';
export {
  ModelSpec,
  OptimizerName,
  ConfigError,
  SEARCH_UNITS,
  SEARCH_DROPOUT,
  SEARCH_BATCH,
  SEARCH_OPTIMIZERS,
  defaultModelSpec,
  validateSpec,
  buildModel,
  makeOptimizer,
  maskedWeightedLoss,
  maskedAccuracy,
} from './model.js';
export {
  Sequence,
  Standardization,
  Batch,
  DataError,
  mulberry32,
  seededShuffle,
  listTrialPairs,
  loadSequence,
  loadDataset,
  splitTrainVal,
  fitStandardization,
  standardize,
  classWeights,
  padBatch,
  makeBatches,
} from './data.js';
export {
  TrainOptions,
  TrainResult,
  EpochLog,
  ArtifactError,
  LayoutVersionError,
  ArtifactManifest,
  LoadedArtifact,
  trainModel,
  pooledAccuracy,
  manifestOf,
  saveArtifact,
  loadArtifact,
} from './train.js';
export {
  SearchTrial,
  SearchResult,
  SearchOptions,
  enumerateSearchSpace,
  randomSearch,
} from './search.js';
export {
  EVENT_SOURCE,
  predictProbabilities,
  eventsFromProbabilities,
  predictEvents,
} from './predict.js';
export {
  SosSection,
  butterLowpassSos,
  sosFiltFilt,
  smooth,
  gradient,
  localMaxima,
} from './signal.js';
