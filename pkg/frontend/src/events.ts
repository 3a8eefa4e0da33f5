/**
 * Event list CSV, shared with the marker-based toolkit:
 * header `side,kind,frame,time_s,source`, side in {L, R}, kind in
 * {HS, TO}, one row per event sorted by time.
 */

import * as fs from 'node:fs';

export type Side = 'L' | 'R';
export type EventKind = 'HS' | 'TO';

export interface EventRecord {
  side: Side;
  kind: EventKind;
  frame: number;
  time: number;
  source: string;
}

export class EventFormatError extends Error {}

const HEADER = 'side,kind,frame,time_s,source';

/** Matches the writer on the Python side, which uses repr(). */
function formatTime(t: number): string {
  const s = String(t);
  return Number.isInteger(t) && !s.includes('e') ? `${s}.0` : s;
}

export function serializeEvents(events: EventRecord[]): string {
  const sorted = [...events].sort(
    (a, b) => a.time - b.time || a.side.localeCompare(b.side) || a.kind.localeCompare(b.kind),
  );
  const lines = [HEADER];
  for (const e of sorted) {
    lines.push(`${e.side},${e.kind},${e.frame},${formatTime(e.time)},${e.source}`);
  }
  return lines.join('\r\n') + '\r\n';
}

export function writeEvents(events: EventRecord[], path: string): void {
  fs.writeFileSync(path, serializeEvents(events));
}

export function parseEvents(text: string, label = 'events'): EventRecord[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0 || lines[0].trim() !== HEADER) {
    throw new EventFormatError(`${label}: events header must be ${HEADER}`);
  }
  const events: EventRecord[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(',').map((c) => c.trim());
    if (cells.length !== 5) {
      throw new EventFormatError(`${label}: line ${i + 1}: expected 5 fields`);
    }
    const [side, kind, frameText, timeText, source] = cells;
    if (side !== 'L' && side !== 'R') {
      throw new EventFormatError(`${label}: line ${i + 1}: bad side ${side}`);
    }
    if (kind !== 'HS' && kind !== 'TO') {
      throw new EventFormatError(`${label}: line ${i + 1}: bad kind ${kind}`);
    }
    const frame = Number(frameText);
    const time = Number(timeText);
    if (!Number.isInteger(frame) || !Number.isFinite(time)) {
      throw new EventFormatError(`${label}: line ${i + 1}: frame/time must be numeric`);
    }
    events.push({ side, kind, frame, time, source });
  }
  return events;
}

export function loadEvents(path: string): EventRecord[] {
  let text: string;
  try {
    text = fs.readFileSync(path, 'utf8');
  } catch (err) {
    throw new EventFormatError(`cannot read events file: ${String(err)}`);
  }
  return parseEvents(text, path);
}
