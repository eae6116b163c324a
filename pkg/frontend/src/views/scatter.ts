import type { Snapshot } from "../types";

export const DESELECTED_COLOR = "#c8c8c8";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ScatterCallbacks {
  onToggle?: (clusterId: number) => void;
  onBrush?: (rowIds: number[]) => void;
}

/** Embedding scatterplot: one dot per row, colored by cluster, gray when
 *  the cluster is deselected, faded when the row is excluded. Dragging a
 *  rectangle brushes rows and reports their ids. */
export class ScatterView {
  private svg: SVGSVGElement;
  private snap: Snapshot | null = null;
  readonly width = 480;
  readonly height = 360;
  private xRange: [number, number] = [0, 1];
  private yRange: [number, number] = [0, 1];

  constructor(root: HTMLElement, private callbacks: ScatterCallbacks = {}) {
    this.svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("class", "scatter-view");
    this.svg.setAttribute("width", String(this.width));
    this.svg.setAttribute("height", String(this.height));
    root.appendChild(this.svg);
  }

  render(snap: Snapshot): void {
    this.snap = snap;
    const xs = snap.points.map((p) => p.x);
    const ys = snap.points.map((p) => p.y);
    this.xRange = [Math.min(...xs), Math.max(...xs)];
    this.yRange = [Math.min(...ys), Math.max(...ys)];
    const excluded = new Set(snap.excluded_ids);
    const colorOf = new Map<number, { color: string; selected: boolean }>();
    for (const c of snap.clusters) {
      colorOf.set(c.id, { color: "#" + c.color, selected: c.selected });
    }
    const clusterOf = new Array<number>(snap.points.length);
    for (const c of snap.clusters) {
      for (const i of c.coords_idx) clusterOf[i] = c.id;
    }
    this.svg.replaceChildren();
    snap.points.forEach((p, i) => {
      const dot = document.createElementNS(SVG_NS, "circle");
      const meta = colorOf.get(clusterOf[i])!;
      dot.setAttribute("cx", String(this.sx(p.x)));
      dot.setAttribute("cy", String(this.sy(p.y)));
      dot.setAttribute("r", "3");
      dot.setAttribute("fill", meta.selected ? meta.color : DESELECTED_COLOR);
      dot.setAttribute("data-row-id", String(p.row_id));
      dot.setAttribute("data-cluster", String(clusterOf[i]));
      dot.setAttribute(
        "class",
        (meta.selected ? "dot" : "dot deselected") + (excluded.has(p.row_id) ? " excluded" : ""),
      );
      if (excluded.has(p.row_id)) dot.setAttribute("opacity", "0.15");
      dot.addEventListener("click", () => this.callbacks.onToggle?.(clusterOf[i]));
      this.svg.appendChild(dot);
    });
  }

  private sx(x: number): number {
    const [lo, hi] = this.xRange;
    return ((x - lo) / (hi - lo || 1)) * (this.width - 20) + 10;
  }

  private sy(y: number): number {
    const [lo, hi] = this.yRange;
    return this.height - (((y - lo) / (hi - lo || 1)) * (this.height - 20) + 10);
  }

  /** Brush a rectangle in data coordinates; reports and returns the
   *  row ids of the non-excluded points inside it. */
  brushRegion(x0: number, y0: number, x1: number, y1: number): number[] {
    if (!this.snap) return [];
    const excluded = new Set(this.snap.excluded_ids);
    const [xa, xb] = [Math.min(x0, x1), Math.max(x0, x1)];
    const [ya, yb] = [Math.min(y0, y1), Math.max(y0, y1)];
    const ids = this.snap.points
      .filter((p) => p.x >= xa && p.x <= xb && p.y >= ya && p.y <= yb)
      .filter((p) => !excluded.has(p.row_id))
      .map((p) => p.row_id);
    this.callbacks.onBrush?.(ids);
    return ids;
  }
}
