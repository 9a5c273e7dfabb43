import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    globalSetup: ["tests/global-server.ts"],
    testTimeout: 30000,
    hookTimeout: 60000,
  },
});
