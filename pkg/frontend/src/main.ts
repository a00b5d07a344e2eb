// Browser wiring: one session per tab, configured by query parameters
// ?api=<base-url>&worker=<id>.

import { ApiClient } from "./api.js";
import { bannerViewModel } from "./banner.js";
import { FeedbackViewModel } from "./overlay.js";
import { renderScene } from "./render.js";
import { Session } from "./session.js";
import { ViewTransform } from "./transform.js";
import { HitPayload } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const params = new URLSearchParams(window.location.search);
  const apiBase = params.get("api") ?? "http://127.0.0.1:8765";
  const worker = params.get("worker") ?? `web-${Math.random().toString(36).slice(2, 8)}`;

  const canvas = el<HTMLCanvasElement>("scene");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  const transform = new ViewTransform();

  const bannerEl = el<HTMLDivElement>("banner");
  const hitInfoEl = el<HTMLDivElement>("hit-info");
  const payoutEl = el<HTMLDivElement>("payout");
  const overlayEl = el<HTMLDivElement>("overlay");
  const overlayBodyEl = el<HTMLDivElement>("overlay-body");
  const submitBtn = el<HTMLButtonElement>("submit");
  const completeBtn = el<HTMLButtonElement>("complete");
  const deleteBtn = el<HTMLButtonElement>("delete");
  const continueBtn = el<HTMLButtonElement>("continue");

  const session = new Session(new ApiClient(apiBase), worker, {
    onBanner: (view) => {
      bannerEl.textContent = view.text;
      bannerEl.className = view.cssClass;
    },
    onHit: (hit: HitPayload) => {
      transform.fit(hit.width, hit.height, canvas.width, canvas.height);
      hitInfoEl.textContent =
        `${hit.kind} · scene ${hit.scene_id} · pays $${(hit.advertised_cents / 100).toFixed(2)}` +
        (hit.kind === "iteration" ? " · add up to 3 boxes or mark complete" : "");
      completeBtn.style.display = hit.kind === "iteration" ? "inline-block" : "none";
      overlayEl.style.display = "none";
      draw();
    },
    onFeedback: (view: FeedbackViewModel) => {
      overlayBodyEl.innerHTML = "";
      for (const line of view.lines) {
        const row = document.createElement("div");
        row.className = "feedback-line";
        row.textContent = `${line.label}: ${line.value}`;
        overlayBodyEl.appendChild(row);
      }
      overlayEl.className = `overlay tone-${view.tone}`;
      overlayEl.style.display = "block";
      draw(view);
    },
    onTerminal: (status, reason) => {
      hitInfoEl.textContent = `Session over (${status}): ${reason}`;
      submitBtn.disabled = true;
      completeBtn.disabled = true;
    },
    onPayout: (cents, bonus) => {
      payoutEl.textContent =
        `Last HIT paid $${(cents / 100).toFixed(2)}` +
        (bonus > 0 ? ` (incl. $${(bonus / 100).toFixed(2)} bonus)` : "");
    },
  });

  function draw(feedback: FeedbackViewModel | null = null): void {
    if (!session.hit || !session.editor) return;
    renderScene(
      ctx as unknown as import("./render.js").Ctx2D,
      {
        width: session.hit.width,
        height: session.hit.height,
        boxes: session.editor.boxes,
        selected: session.editor.selected,
        draft: session.editor.draft,
        markers: session.hit.markers,
        goldBoxes: feedback?.goldBoxes,
        goldLabels: feedback?.perBoxLabels,
        viewW: canvas.width,
        viewH: canvas.height,
      },
      transform
    );
  }

  const toImage = (ev: MouseEvent) => {
    const rect = canvas.getBoundingClientRect();
    return transform.screenToImage({ x: ev.clientX - rect.left, y: ev.clientY - rect.top });
  };

  canvas.addEventListener("mousedown", (ev) => {
    if (session.phase !== "annotating" || !session.editor) return;
    session.editor.pointerDown(toImage(ev));
    draw();
  });
  canvas.addEventListener("mousemove", (ev) => {
    if (session.phase !== "annotating" || !session.editor) return;
    session.editor.pointerMove(toImage(ev));
    draw();
  });
  canvas.addEventListener("mouseup", () => {
    if (session.phase !== "annotating" || !session.editor) return;
    session.editor.pointerUp();
    draw();
  });
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const rect = canvas.getBoundingClientRect();
    transform.zoomAt(
      { x: ev.clientX - rect.left, y: ev.clientY - rect.top },
      ev.deltaY < 0 ? 1.15 : 1 / 1.15
    );
    draw(session.feedback);
  });
  window.addEventListener("keydown", (ev) => {
    if (ev.key === "Delete" || ev.key === "Backspace") {
      if (session.editor?.deleteSelected()) draw();
    }
  });

  submitBtn.addEventListener("click", () => void session.submit(false));
  completeBtn.addEventListener("click", () => void session.submit(true));
  deleteBtn.addEventListener("click", () => {
    if (session.editor?.deleteSelected()) draw();
  });
  continueBtn.addEventListener("click", () => void session.acknowledgeFeedback());

  bannerEl.textContent = bannerViewModel(session.banner).text;
  void session.start();
}

main();
