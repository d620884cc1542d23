import { defineConfig } from "vitest/config";

export default defineConfig({
  base: "./", // bundle is served from probekit serve --static or any static host
  build: { outDir: "dist", target: "es2022" },
  test: {
    globals: true,
    environment: "node",
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
