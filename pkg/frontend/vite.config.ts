import { defineConfig } from "vitest/config";

// Dev-mode proxy to a locally running correction service; the production
// bundle is served by the service itself (bench serve --ui-dir frontend/dist).
const service = "http://127.0.0.1:8008";

export default defineConfig({
  server: {
    proxy: {
      "/sessions": service,
      "/kernels": service,
    },
  },
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    testTimeout: 60000,
    hookTimeout: 60000,
  },
});
