import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { parseEventStream, type FeedbackEvent } from "../src/protocol.js";

const HERE = dirname(fileURLToPath(import.meta.url));

export function loadFixture(name: string): FeedbackEvent[] {
  const text = readFileSync(join(HERE, "..", "fixtures", name), "utf-8");
  return parseEventStream(text);
}

export const CASE_STUDY_SOURCE = [
  "def average(nums):",
  "    return sum(nums)/len(nums)",
  "print(average([]))",
].join("\n");
