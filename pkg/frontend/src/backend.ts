/**
 * Compute backend selection. The WASM backend (SIMD) trains roughly 3x
 * faster than the pure-JS CPU backend here, so it is the default; set
 * GAITEVENTS_LSTM_BACKEND=cpu to force the fallback.
 */

import * as tf from '@tensorflow/tfjs';
import '@tensorflow/tfjs-backend-wasm';

let pending: Promise<string> | null = null;

export function initBackend(prefer?: string): Promise<string> {
  if (!pending) {
    pending = (async () => {
      const want = prefer ?? process.env.GAITEVENTS_LSTM_BACKEND ?? 'wasm';
      if (want !== 'cpu') {
        try {
          if (await tf.setBackend(want)) {
            await tf.ready();
            return tf.getBackend();
          }
        } catch {
          // fall through to the pure-JS backend
        }
      }
      await tf.setBackend('cpu');
      await tf.ready();
      return tf.getBackend();
    })();
  }
  return pending;
}
