import { defineConfig } from "vitest/config";

export default defineConfig({
  server: {
    proxy: {
      // dev server proxies API calls to a locally running `crtassure serve`
      "/api": "http://127.0.0.1:8000",
      "/healthz": "http://127.0.0.1:8000",
    },
  },
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
  },
});
