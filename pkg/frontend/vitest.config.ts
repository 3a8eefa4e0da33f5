import { defineConfig } from 'vitest/config';

// the acceptance suite trains a full model; opt in with RUN_ACCEPTANCE=1
// (npm run test:acceptance) so plain `npm test` stays quick
const acceptance = process.env.RUN_ACCEPTANCE === '1';

export default defineConfig({
  test: {
    include: ['test/**/*.test.ts'],
    exclude: ['**/node_modules/**', ...(acceptance ? [] : ['test/acceptance.test.ts'])],
    testTimeout: acceptance ? 1_800_000 : 120_000,
    hookTimeout: acceptance ? 1_800_000 : 120_000,
    fileParallelism: false,
  },
});
