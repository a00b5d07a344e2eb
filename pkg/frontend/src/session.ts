// Session state machine. All transitions follow server responses; there
// is no optimistic state and no client-side scoring. A gold feedback
// overlay is modal: the next HIT cannot be requested until acknowledged.

import { ApiClient } from "./api.js";
import { BoxEditor } from "./boxes.js";
import { NO_RATING, bannerViewModel, BannerViewModel } from "./banner.js";
import { feedbackViewModel, FeedbackViewModel } from "./overlay.js";
import { BannerPayload, HitPayload, isTerminal, SubmitResponse } from "./types.js";

export type Phase = "idle" | "annotating" | "feedback" | "terminal";

export interface SessionEvents {
  onHit?: (hit: HitPayload) => void;
  onFeedback?: (view: FeedbackViewModel) => void;
  onBanner?: (view: BannerViewModel) => void;
  onTerminal?: (status: string, reason: string) => void;
  onPayout?: (cents: number, bonusCents: number) => void;
}

export class Session {
  phase: Phase = "idle";
  hit: HitPayload | null = null;
  editor: BoxEditor | null = null;
  banner: BannerPayload = NO_RATING;
  feedback: FeedbackViewModel | null = null;
  terminalReason = "";
  bannerRefreshes = 0;
  private startedAt = 0;

  constructor(
    private api: ApiClient,
    private worker: string,
    private events: SessionEvents = {},
    private clock: () => number = () => Date.now()
  ) {}

  /** Kick off the session: paint the empty banner, fetch the first HIT. */
  async start(): Promise<void> {
    this.events.onBanner?.(bannerViewModel(this.banner));
    await this.requestNextHit();
  }

  async requestNextHit(): Promise<void> {
    if (this.phase === "feedback") {
      throw new Error("feedback must be acknowledged before continuing");
    }
    const response = await this.api.nextHit(this.worker);
    if (isTerminal(response)) {
      this.phase = "terminal";
      this.terminalReason = response.reason;
      this.events.onTerminal?.(response.terminal, response.reason);
      return;
    }
    this.hit = response;
    this.editor = new BoxEditor(response.width, response.height);
    if (response.prior_boxes) {
      this.editor.boxes = response.prior_boxes.map(([x, y, w, h]) => ({ x, y, w, h }));
    }
    this.phase = "annotating";
    this.startedAt = this.clock();
    this.events.onHit?.(response);
  }

  async submit(complete = false): Promise<SubmitResponse> {
    if (this.phase !== "annotating" || !this.hit || !this.editor) {
      throw new Error("nothing to submit");
    }
    const elapsed = Math.max(0, (this.clock() - this.startedAt) / 1000);
    const response = await this.api.submit(
      this.worker,
      this.hit.hit_id,
      this.editor.toSubmission(),
      elapsed,
      complete
    );
    // the banner refreshes exactly once per submit round-trip
    this.banner = response.banner;
    this.bannerRefreshes += 1;
    this.events.onBanner?.(bannerViewModel(this.banner));
    this.events.onPayout?.(response.payout_cents, response.bonus_cents);

    if (response.blocked) {
      this.phase = "terminal";
      this.terminalReason = "quality below threshold";
      this.events.onTerminal?.("blocked", this.terminalReason);
      return response;
    }
    if (response.feedback) {
      this.phase = "feedback";
      this.feedback = feedbackViewModel(response.feedback);
      this.events.onFeedback?.(this.feedback);
    } else {
      this.phase = "idle";
      await this.requestNextHit();
    }
    return response;
  }

  /** Close the modal feedback overlay and move on. */
  async acknowledgeFeedback(): Promise<void> {
    if (this.phase !== "feedback") throw new Error("no feedback to acknowledge");
    this.feedback = null;
    this.phase = "idle";
    await this.requestNextHit();
  }

  /** Re-render the banner from GET /status (page reload of a returning
   * worker). Tolerates unknown workers by keeping the local default. */
  async refreshBannerFromStatus(): Promise<void> {
    try {
      const status = await this.api.status(this.worker);
      this.banner = status.banner;
      this.events.onBanner?.(bannerViewModel(this.banner));
    } catch {
      this.events.onBanner?.(bannerViewModel(this.banner));
    }
  }
}
