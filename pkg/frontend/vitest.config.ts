import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    environmentOptions: {
      // the live round-trip test talks to a service on another port
      happyDOM: { settings: { fetch: { disableSameOriginPolicy: true } } },
    },
    include: ["test/**/*.test.ts"],
  },
});
