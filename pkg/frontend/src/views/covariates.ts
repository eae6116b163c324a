import type { Snapshot } from "../types";
import { DESELECTED_COLOR } from "./scatter";

const SVG_NS = "http://www.w3.org/2000/svg";

/** Covariate summary matrix: one row per displayed covariate, one column
 *  per cluster, each cell a tiny histogram in the cluster color. */
export class CovariateView {
  constructor(private root: HTMLElement) {}

  render(snap: Snapshot): void {
    const table = document.createElement("table");
    table.className = "covariate-view";

    const head = document.createElement("tr");
    head.appendChild(document.createElement("th"));
    for (const c of snap.clusters) {
      const th = document.createElement("th");
      th.textContent = `${c.name} (${c.size})`;
      th.setAttribute("data-cluster", String(c.id));
      th.className = c.selected ? "" : "deselected";
      th.style.color = c.selected ? "#" + c.color : DESELECTED_COLOR;
      head.appendChild(th);
    }
    table.appendChild(head);

    for (const col of snap.covariate_display) {
      const tr = document.createElement("tr");
      const name = document.createElement("td");
      name.textContent = col;
      name.className = "covariate-name";
      tr.appendChild(name);
      const summaries = snap.covariate_summaries[col] ?? [];
      for (const c of snap.clusters) {
        const td = document.createElement("td");
        td.setAttribute("data-cluster", String(c.id));
        td.className = c.selected ? "" : "deselected";
        const s = summaries[c.id];
        if (s) {
          td.appendChild(this.sparkline(s.hist, c.selected ? "#" + c.color : DESELECTED_COLOR));
          td.title = `median ${s.median}, range [${s.min}, ${s.max}]`;
        } else {
          td.textContent = "—";
        }
        tr.appendChild(td);
      }
      table.appendChild(tr);
    }

    this.root.replaceChildren(table);
  }

  private sparkline(hist: number[], color: string): SVGSVGElement {
    const w = 60;
    const h = 24;
    const svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    svg.setAttribute("width", String(w));
    svg.setAttribute("height", String(h));
    const peak = Math.max(...hist, 1);
    const bw = w / hist.length;
    hist.forEach((v, i) => {
      const bar = document.createElementNS(SVG_NS, "rect");
      const bh = (v / peak) * (h - 2);
      bar.setAttribute("x", String(i * bw));
      bar.setAttribute("y", String(h - bh));
      bar.setAttribute("width", String(Math.max(bw - 1, 1)));
      bar.setAttribute("height", String(bh));
      bar.setAttribute("fill", color);
      svg.appendChild(bar);
    });
    return svg;
  }
}
