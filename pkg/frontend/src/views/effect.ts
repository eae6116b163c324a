import type { Cluster, Snapshot } from "../types";
import { DESELECTED_COLOR } from "./scatter";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface EffectCallbacks {
  onToggle?: (clusterId: number) => void;
}

function fmt(v: number | null, digits = 4): string {
  return v === null ? "n/a" : v.toPrecision(digits);
}

/** Per-cluster effect view: one panel per cluster with its points and
 *  regression line over treatment/outcome axes shared across panels,
 *  the overall fit as a faint dashed line, and the ATE in the header. */
export class EffectView {
  private header: HTMLElement;
  private panels: HTMLElement;
  readonly panelW = 150;
  readonly panelH = 110;

  constructor(private root: HTMLElement, private callbacks: EffectCallbacks = {}) {
    this.header = document.createElement("div");
    this.header.className = "ate-header";
    this.panels = document.createElement("div");
    this.panels.className = "effect-panels";
    root.appendChild(this.header);
    root.appendChild(this.panels);
  }

  render(snap: Snapshot): void {
    this.header.textContent = snap.ate.defined
      ? `ATE = ${fmt(snap.ate.value)} (${snap.treatment} → ${snap.outcome}, n = ${snap.ate.n_total})`
      : "ATE undefined — no selected clusters";
    this.header.setAttribute("data-ate", String(snap.ate.value ?? "null"));
    this.header.setAttribute("data-version", String(snap.version));

    // shared axes over the rows still in the analysis
    const excluded = new Set(snap.excluded_ids);
    const active = snap.points.filter((p) => !excluded.has(p.row_id));
    const ts = active.map((p) => p.t_value);
    const os = active.map((p) => p.o_value);
    const tDom: [number, number] = [Math.min(...ts), Math.max(...ts)];
    const oDom: [number, number] = [Math.min(...os), Math.max(...os)];
    this.root.setAttribute("data-xmax", String(tDom[1]));
    this.root.setAttribute("data-xmin", String(tDom[0]));

    this.panels.replaceChildren();
    for (const c of snap.clusters) {
      this.panels.appendChild(this.panel(snap, c, tDom, oDom));
    }
  }

  private panel(
    snap: Snapshot,
    c: Cluster,
    tDom: [number, number],
    oDom: [number, number],
  ): HTMLElement {
    const div = document.createElement("div");
    div.className = c.selected ? "cluster-panel" : "cluster-panel deselected";
    div.setAttribute("data-cluster", String(c.id));
    div.addEventListener("click", () => this.callbacks.onToggle?.(c.id));

    const color = c.selected ? "#" + c.color : DESELECTED_COLOR;
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("width", String(this.panelW));
    svg.setAttribute("height", String(this.panelH));

    const sx = (t: number) =>
      ((t - tDom[0]) / (tDom[1] - tDom[0] || 1)) * (this.panelW - 10) + 5;
    const sy = (o: number) =>
      this.panelH - (((o - oDom[0]) / (oDom[1] - oDom[0] || 1)) * (this.panelH - 10) + 5);

    const excluded = new Set(snap.excluded_ids);
    for (const i of c.coords_idx) {
      const p = snap.points[i];
      if (excluded.has(p.row_id)) continue;
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", String(sx(p.t_value)));
      dot.setAttribute("cy", String(sy(p.o_value)));
      dot.setAttribute("r", "2");
      dot.setAttribute("fill", color);
      svg.appendChild(dot);
    }

    const addLine = (fit: typeof c.fit, cls: string, stroke: string, dashed: boolean) => {
      if (!fit.defined || fit.slope === null || fit.intercept === null) return;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(sx(tDom[0])));
      line.setAttribute("y1", String(sy(fit.intercept + fit.slope * tDom[0])));
      line.setAttribute("x2", String(sx(tDom[1])));
      line.setAttribute("y2", String(sy(fit.intercept + fit.slope * tDom[1])));
      line.setAttribute("class", cls);
      line.setAttribute("stroke", stroke);
      if (dashed) {
        line.setAttribute("stroke-dasharray", "4 3");
        line.setAttribute("opacity", "0.3");
      }
      svg.appendChild(line);
    };
    addLine(snap.overall_fit, "overall-line", "#555555", true);
    addLine(c.fit, "fit-line", color, false);

    const label = document.createElement("div");
    label.className = "cluster-label";
    label.textContent = c.fit.defined
      ? `${c.name}: b = ${fmt(c.fit.slope)}, p = ${fmt(c.fit.p, 2)}, n = ${c.fit.n}`
      : `${c.name}: no fit (n = ${c.fit.n})`;
    if (snap.simpson.flagged.includes(c.id)) {
      label.textContent += " ⚠ opposes overall trend";
      div.classList.add("simpson-flagged");
    }

    div.appendChild(svg);
    div.appendChild(label);
    return div;
  }
}
