import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // per-file pragmas pick happy-dom where the DOM is needed
    environment: "node",
    testTimeout: 30000,
    hookTimeout: 45000,
  },
});
