// Defense-in-depth: the server must never send ground truth or gold
// status before submission, and the client refuses to proceed if it does.

const FORBIDDEN_KEYS = ["gold", "gt", "ground_truth", "gt_boxes", "answer", "is_gold"];

export class LeakError extends Error {}

export function auditPreSubmissionPayload(payload: unknown): void {
  const seen = new Set<unknown>();
  const walk = (node: unknown): void => {
    if (node === null || typeof node !== "object" || seen.has(node)) return;
    seen.add(node);
    if (Array.isArray(node)) {
      node.forEach(walk);
      return;
    }
    for (const [key, value] of Object.entries(node as Record<string, unknown>)) {
      const lower = key.toLowerCase();
      for (const bad of FORBIDDEN_KEYS) {
        if (lower === bad || lower.includes("gold") || lower.includes("ground")) {
          throw new LeakError(`pre-submission payload contains forbidden field '${key}'`);
        }
      }
      walk(value);
    }
  };
  walk(payload);
}

/** Scan a serialized payload for any of the scene's ground-truth box
 * coordinate quadruples. Used by contract tests. */
export function containsGroundTruthBytes(
  serialized: string,
  gtBoxes: [number, number, number, number][]
): boolean {
  return gtBoxes.some((box) => serialized.includes(JSON.stringify(box)));
}
