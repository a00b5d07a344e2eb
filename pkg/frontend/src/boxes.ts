// Box editor model: create by drag, adjust by corner handles or body move,
// delete selection. All coordinates are image pixels; drags smaller than
// MIN_DRAG_PX in either dimension are discarded.

import { Point } from "./transform.js";

export const MIN_DRAG_PX = 3;
export const HANDLE_TOLERANCE_PX = 6;

export interface CanvasBox {
  x: number;
  y: number;
  w: number;
  h: number;
}

export type Handle = "nw" | "ne" | "sw" | "se" | "move";

interface DraftDrag {
  kind: "draw";
  start: Point;
  current: Point;
}

interface AdjustDrag {
  kind: "adjust";
  index: number;
  handle: Handle;
  start: Point;
  original: CanvasBox;
}

export class BoxEditor {
  boxes: CanvasBox[] = [];
  selected: number | null = null;
  private drag: DraftDrag | AdjustDrag | null = null;

  constructor(
    public imageW: number,
    public imageH: number
  ) {}

  /** Corner handle at the point, if the point grabs an existing box. */
  hitTest(p: Point): { index: number; handle: Handle } | null {
    for (let i = this.boxes.length - 1; i >= 0; i--) {
      const b = this.boxes[i];
      const corners: [Handle, number, number][] = [
        ["nw", b.x, b.y],
        ["ne", b.x + b.w, b.y],
        ["sw", b.x, b.y + b.h],
        ["se", b.x + b.w, b.y + b.h],
      ];
      for (const [handle, cx, cy] of corners) {
        if (Math.abs(p.x - cx) <= HANDLE_TOLERANCE_PX && Math.abs(p.y - cy) <= HANDLE_TOLERANCE_PX) {
          return { index: i, handle };
        }
      }
      if (p.x >= b.x && p.x <= b.x + b.w && p.y >= b.y && p.y <= b.y + b.h) {
        return { index: i, handle: "move" };
      }
    }
    return null;
  }

  pointerDown(p: Point): void {
    const hit = this.hitTest(p);
    if (hit) {
      this.selected = hit.index;
      this.drag = {
        kind: "adjust",
        index: hit.index,
        handle: hit.handle,
        start: p,
        original: { ...this.boxes[hit.index] },
      };
      return;
    }
    this.selected = null;
    this.drag = { kind: "draw", start: p, current: p };
  }

  pointerMove(p: Point): void {
    if (!this.drag) return;
    if (this.drag.kind === "draw") {
      this.drag.current = p;
      return;
    }
    const { index, handle, start, original } = this.drag;
    const dx = p.x - start.x;
    const dy = p.y - start.y;
    let { x, y, w, h } = original;
    if (handle === "move") {
      x += dx;
      y += dy;
    } else {
      let x0 = x;
      let y0 = y;
      let x1 = x + w;
      let y1 = y + h;
      if (handle.includes("w")) x0 += dx;
      if (handle.includes("e")) x1 += dx;
      if (handle.includes("n")) y0 += dy;
      if (handle.includes("s")) y1 += dy;
      x = Math.min(x0, x1);
      y = Math.min(y0, y1);
      w = Math.abs(x1 - x0);
      h = Math.abs(y1 - y0);
    }
    this.boxes[index] = this.clampToImage({ x, y, w, h });
  }

  /** Finish the active drag. Returns the created box, if any. */
  pointerUp(): CanvasBox | null {
    const drag = this.drag;
    this.drag = null;
    if (!drag) return null;
    if (drag.kind === "adjust") {
      const adjusted = this.boxes[drag.index];
      if (adjusted.w < MIN_DRAG_PX || adjusted.h < MIN_DRAG_PX) {
        this.boxes[drag.index] = drag.original; // degenerate resize reverts
      }
      return null;
    }
    const x = Math.min(drag.start.x, drag.current.x);
    const y = Math.min(drag.start.y, drag.current.y);
    const w = Math.abs(drag.current.x - drag.start.x);
    const h = Math.abs(drag.current.y - drag.start.y);
    if (w < MIN_DRAG_PX || h < MIN_DRAG_PX) return null; // degenerate drag discarded
    const box = this.clampToImage({ x, y, w, h });
    this.boxes.push(box);
    this.selected = this.boxes.length - 1;
    return box;
  }

  get draft(): CanvasBox | null {
    if (!this.drag || this.drag.kind !== "draw") return null;
    const { start, current } = this.drag;
    return {
      x: Math.min(start.x, current.x),
      y: Math.min(start.y, current.y),
      w: Math.abs(current.x - start.x),
      h: Math.abs(current.y - start.y),
    };
  }

  deleteSelected(): boolean {
    if (this.selected === null) return false;
    this.boxes.splice(this.selected, 1);
    this.selected = null;
    return true;
  }

  clear(): void {
    this.boxes = [];
    this.selected = null;
    this.drag = null;
  }

  private clampToImage(b: CanvasBox): CanvasBox {
    const x = Math.max(0, Math.min(b.x, this.imageW - MIN_DRAG_PX));
    const y = Math.max(0, Math.min(b.y, this.imageH - MIN_DRAG_PX));
    const w = Math.min(b.w, this.imageW - x);
    const h = Math.min(b.h, this.imageH - y);
    return { x, y, w, h };
  }

  /** Bijective mapping to the wire format on submit. */
  toSubmission(): [number, number, number, number][] {
    return this.boxes.map((b) => [b.x, b.y, b.w, b.h]);
  }
}
