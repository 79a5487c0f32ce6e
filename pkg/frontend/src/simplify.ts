/**
 * The "Simplify" control: re-explain the same submission at beginner
 * level. The original turn is never mutated; a derived idempotency key
 * makes a retried click land on the same turn instead of a duplicate.
 */

import type { Level, SubmitRequest } from "./protocol.js";
import type { Turn } from "./transcript.js";

export const SIMPLIFY_TARGET: Level = "beginner";

export function simplifyEligible(turn: Turn): boolean {
  const hasDiagnosis = turn.items.some((item) => item.type === "diagnosis");
  return hasDiagnosis && turn.level !== SIMPLIFY_TARGET && turn.state === "complete";
}

export interface SimplifyPlan {
  key: string;
  request: Omit<SubmitRequest, "pseudonym">;
}

export function buildSimplify(turn: Turn): SimplifyPlan | null {
  if (!simplifyEligible(turn)) return null;
  return {
    key: `${turn.key}~simplified`,
    request: {
      source: turn.source,
      query: turn.query,
      mode: turn.mode === "socratic" ? "socratic" : "direct",
      level: SIMPLIFY_TARGET,
    },
  };
}
