// Zoom/pan mapping between image coordinates (what the server speaks) and
// screen coordinates (what the canvas draws). screen = (image - origin) * scale.

export interface Point {
  x: number;
  y: number;
}

export class ViewTransform {
  constructor(
    public scale = 1,
    public originX = 0,
    public originY = 0
  ) {}

  imageToScreen(p: Point): Point {
    return { x: (p.x - this.originX) * this.scale, y: (p.y - this.originY) * this.scale };
  }

  screenToImage(p: Point): Point {
    return { x: p.x / this.scale + this.originX, y: p.y / this.scale + this.originY };
  }

  /** Zoom by `factor` keeping the given screen point fixed. */
  zoomAt(screen: Point, factor: number): void {
    const anchor = this.screenToImage(screen);
    this.scale = Math.min(32, Math.max(1 / 16, this.scale * factor));
    this.originX = anchor.x - screen.x / this.scale;
    this.originY = anchor.y - screen.y / this.scale;
  }

  panByScreen(dx: number, dy: number): void {
    this.originX -= dx / this.scale;
    this.originY -= dy / this.scale;
  }

  /** Fit an image extent into a viewport, centered. */
  fit(imageW: number, imageH: number, viewW: number, viewH: number): void {
    this.scale = Math.min(viewW / imageW, viewH / imageH);
    this.originX = (imageW - viewW / this.scale) / 2;
    this.originY = (imageH - viewH / this.scale) / 2;
  }
}
