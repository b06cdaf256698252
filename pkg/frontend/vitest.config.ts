import { defineConfig } from "vitest/config";

export default defineConfig({
  resolve: {
    // source files import with explicit .js extensions (native-ESM browser
    // output); map them back to the .ts sources for the test runner
    alias: [{ find: /^(\.{1,2}\/.*)\.js$/, replacement: "$1" }],
  },
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
  },
});
