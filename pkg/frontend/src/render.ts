// Canvas drawing. Takes the minimal 2D-context surface we use so tests can
// substitute a recording fake.

import { CanvasBox } from "./boxes.js";
import { ViewTransform } from "./transform.js";

export interface Ctx2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  stroke(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  strokeStyle: string;
  fillStyle: string;
  lineWidth: number;
  font: string;
}

export interface SceneView {
  width: number;
  height: number;
  boxes: CanvasBox[];
  selected: number | null;
  draft: CanvasBox | null;
  markers?: [number, number][];
  goldBoxes?: [number, number, number, number][];
  goldLabels?: string[];
  viewW: number;
  viewH: number;
}

const WORKER_BOX = "#2f81f7";
const SELECTED_BOX = "#ff9f1c";
const GOLD_BOX = "#10b981";
const MARKER = "#d946ef";

export function renderScene(ctx: Ctx2D, view: SceneView, transform: ViewTransform): void {
  ctx.clearRect(0, 0, view.viewW, view.viewH);

  // image extent as a backdrop (no pixels exist; scenes are abstract)
  const tl = transform.imageToScreen({ x: 0, y: 0 });
  const br = transform.imageToScreen({ x: view.width, y: view.height });
  ctx.fillStyle = "#1b1f27";
  ctx.fillRect(tl.x, tl.y, br.x - tl.x, br.y - tl.y);

  if (view.markers) {
    ctx.fillStyle = MARKER;
    for (const [mx, my] of view.markers) {
      const p = transform.imageToScreen({ x: mx, y: my });
      ctx.beginPath();
      ctx.arc(p.x, p.y, 5, 0, Math.PI * 2);
      ctx.fill();
    }
  }

  view.boxes.forEach((box, i) => {
    drawBox(ctx, box, transform, i === view.selected ? SELECTED_BOX : WORKER_BOX, 2);
  });

  if (view.draft) {
    drawBox(ctx, view.draft, transform, WORKER_BOX, 1);
  }

  if (view.goldBoxes) {
    ctx.font = "12px sans-serif";
    view.goldBoxes.forEach(([x, y, w, h], i) => {
      drawBox(ctx, { x, y, w, h }, transform, GOLD_BOX, 3);
      const label = view.goldLabels?.[i];
      if (label) {
        const p = transform.imageToScreen({ x, y });
        ctx.fillStyle = GOLD_BOX;
        ctx.fillText(label, p.x + 2, p.y - 4);
      }
    });
  }
}

function drawBox(
  ctx: Ctx2D,
  box: CanvasBox,
  transform: ViewTransform,
  color: string,
  width: number
): void {
  const tl = transform.imageToScreen({ x: box.x, y: box.y });
  const br = transform.imageToScreen({ x: box.x + box.w, y: box.y + box.h });
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.strokeRect(tl.x, tl.y, br.x - tl.x, br.y - tl.y);
}
