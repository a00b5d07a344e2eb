// Gold feedback overlay view model: the full reveal a worker sees right
// after submitting a gold question. Modal: the session cannot advance
// until the worker acknowledges it.

import { FeedbackPayload } from "./types.js";

export interface OverlayLine {
  label: string;
  value: string;
}

export interface FeedbackViewModel {
  lines: OverlayLine[];
  perBoxLabels: string[]; // one "NN%" label per matched box
  goldBoxes: [number, number, number, number][];
  tone: "good" | "warn" | "bad";
}

export function feedbackViewModel(feedback: FeedbackPayload): FeedbackViewModel {
  const avg = feedback.average_accuracy;
  const tone = avg >= 75 ? "good" : avg >= 50 ? "warn" : "bad";
  return {
    lines: [
      { label: "Objects missed", value: String(feedback.missed_count) },
      { label: "Boxes not matching any object", value: String(feedback.false_positive_count) },
      {
        label: "Accuracy per matched box",
        value: feedback.per_box_iou.length
          ? feedback.per_box_iou.map((v) => `${v.toFixed(1)}%`).join(", ")
          : "none matched",
      },
      { label: "Average accuracy", value: `${avg.toFixed(1)}%` },
      { label: "Correct answer", value: `${feedback.gold_boxes.length} boxes shown in green` },
    ],
    perBoxLabels: feedback.per_box_iou.map((v) => `${v.toFixed(0)}%`),
    goldBoxes: feedback.gold_boxes,
    tone,
  };
}
