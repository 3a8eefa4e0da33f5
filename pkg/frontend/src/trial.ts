/**
 * Reader for the canonical trial CSV: a comment header
 * `# sample_rate_hz=<fs>, units=<m|mm>`, a `frame` column, then
 * `<MARKER>_{x,y,z}` position columns and optional force columns.
 * Positions in mm are converted to meters; empty cells are gaps.
 */

import * as fs from 'node:fs';

export interface MarkerSeries {
  /** frame-major [x0, y0, z0, x1, y1, z1, ...] */
  xyz: Float64Array;
  /** true where any of the three components is missing */
  gap: Uint8Array;
}

export interface Trial {
  trialId: string;
  sampleRate: number;
  frames: number;
  markers: Map<string, MarkerSeries>;
}

export class TrialFormatError extends Error {}
export class MissingMarkerError extends Error {}

const AXES = ['x', 'y', 'z'] as const;

export function parseTrialCsv(text: string, trialId: string): Trial {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length < 3) {
    throw new TrialFormatError(`${trialId}: too short to be a trial CSV`);
  }
  const header = /^#\s*sample_rate_hz=([0-9.eE+-]+),\s*units=(m|mm)\s*$/.exec(
    lines[0],
  );
  if (!header) {
    throw new TrialFormatError(
      `${trialId}: bad header line: ${JSON.stringify(lines[0])}`,
    );
  }
  const sampleRate = Number(header[1]);
  if (!(sampleRate > 0)) {
    throw new TrialFormatError(`${trialId}: bad sample rate ${header[1]}`);
  }
  const scale = header[2] === 'mm' ? 1e-3 : 1.0;

  const columns = lines[1].split(',').map((c) => c.trim());
  if (columns[0] !== 'frame') {
    throw new TrialFormatError(`${trialId}: first column must be 'frame'`);
  }
  // marker name -> column index of its x component
  const markerCols = new Map<string, number>();
  for (let c = 1; c < columns.length; c++) {
    if (columns[c].endsWith('_x') && !columns[c].startsWith('grf_')) {
      markerCols.set(columns[c].slice(0, -2), c);
    }
  }
  for (const [name, cx] of markerCols) {
    if (columns[cx + 1] !== `${name}_y` || columns[cx + 2] !== `${name}_z`) {
      throw new TrialFormatError(`${trialId}: ${name} columns not contiguous`);
    }
  }
  if (markerCols.size === 0) {
    throw new TrialFormatError(`${trialId}: no marker columns`);
  }

  const frames = lines.length - 2;
  const markers = new Map<string, MarkerSeries>();
  for (const name of markerCols.keys()) {
    markers.set(name, {
      xyz: new Float64Array(frames * 3),
      gap: new Uint8Array(frames),
    });
  }

  for (let r = 0; r < frames; r++) {
    const cells = lines[r + 2].split(',');
    if (cells.length !== columns.length) {
      throw new TrialFormatError(
        `${trialId}: line ${r + 3}: ${cells.length} cells, expected ${columns.length}`,
      );
    }
    for (const [name, cx] of markerCols) {
      const series = markers.get(name)!;
      for (let a = 0; a < 3; a++) {
        const cell = cells[cx + a].trim();
        if (cell === '') {
          series.gap[r] = 1;
          series.xyz[r * 3 + a] = NaN;
          continue;
        }
        const value = Number(cell);
        if (!Number.isFinite(value)) {
          throw new TrialFormatError(
            `${trialId}: line ${r + 3}: bad ${name}_${AXES[a]} value ${JSON.stringify(cell)}`,
          );
        }
        series.xyz[r * 3 + a] = value * scale;
      }
    }
  }
  return { trialId, sampleRate, frames, markers };
}

export function loadTrial(path: string): Trial {
  let text: string;
  try {
    text = fs.readFileSync(path, 'utf8');
  } catch (err) {
    throw new TrialFormatError(`cannot read trial: ${String(err)}`);
  }
  const stem = path.replace(/\\/g, '/').split('/').pop()!.replace(/\.csv$/, '');
  return parseTrialCsv(text, stem);
}

/** One column of a marker, gaps bridged linearly (edges clamped). */
export function markerColumn(trial: Trial, name: string, axis: number): Float64Array {
  const series = trial.markers.get(name);
  if (!series) {
    throw new MissingMarkerError(`${trial.trialId}: missing marker: ${name}`);
  }
  const n = trial.frames;
  const out = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    out[i] = series.xyz[i * 3 + axis];
  }
  let lastValid = -1;
  for (let i = 0; i < n; i++) {
    if (!Number.isNaN(out[i])) {
      if (lastValid < 0 && i > 0) {
        out.fill(out[i], 0, i); // leading gap: clamp
      } else if (lastValid >= 0 && i - lastValid > 1) {
        const a = out[lastValid];
        const b = out[i];
        for (let j = lastValid + 1; j < i; j++) {
          out[j] = a + ((b - a) * (j - lastValid)) / (i - lastValid);
        }
      }
      lastValid = i;
    }
  }
  if (lastValid < 0) {
    throw new TrialFormatError(`${trial.trialId}: ${name} has no valid samples`);
  }
  if (lastValid < n - 1) {
    out.fill(out[lastValid], lastValid + 1); // trailing gap: clamp
  }
  return out;
}
