// Wire types for the task-service API. The server is the single source of
// truth for scores; nothing here carries ground truth before submission.

export interface HitPayload {
  hit_id: string;
  scene_id: string;
  width: number;
  height: number;
  advertised_cents: number;
  kind: "scene" | "subtask" | "iteration";
  markers?: [number, number][];
  prior_boxes?: [number, number, number, number][];
  iteration?: number;
}

export interface TerminalPayload {
  terminal: "blocked" | "exhausted";
  reason: string;
}

export interface BannerPayload {
  has_rating: boolean;
  running_avg: number;
  tier: string | null;
  message: string;
}

export interface FeedbackPayload {
  missed_count: number;
  false_positive_count: number;
  per_box_iou: number[];
  average_accuracy: number;
  gold_boxes: [number, number, number, number][];
}

export interface SubmitResponse {
  banner: BannerPayload;
  payout_cents: number;
  bonus_cents: number;
  blocked: boolean;
  warned: boolean;
  feedback?: FeedbackPayload;
}

export interface StatusPayload {
  worker_id: string;
  running_avg: number;
  gold_count: number;
  tier: string | null;
  banner: BannerPayload;
  blocked: boolean;
  warnings: number;
  bonus_total_cents: number;
  hits_completed: number;
  pay_cents: number;
}

export type NextHitResponse = HitPayload | TerminalPayload;

export function isTerminal(r: NextHitResponse): r is TerminalPayload {
  return (r as TerminalPayload).terminal !== undefined;
}
