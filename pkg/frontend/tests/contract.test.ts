import { beforeEach, describe, expect, it } from "vitest";

import { App } from "../src/app";
import { DESELECTED_COLOR } from "../src/views/scatter";
import { FakeServer, fixtures } from "./fake_server";

function mount(): { app: App; server: FakeServer; root: HTMLElement } {
  document.body.innerHTML =
    '<div id="s"></div><div id="e"></div><div id="c"></div><button id="x"></button>';
  const server = new FakeServer();
  const app = new App(server.client, "s1", {
    scatter: document.getElementById("s")!,
    effect: document.getElementById("e")!,
    covariates: document.getElementById("c")!,
    excludeButton: document.getElementById("x")!,
  });
  return { app, server, root: document.body };
}

const deselectedId = fixtures.base.clusters.find((c) => !c.selected)!.id;

describe("coordinated views", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("renders deselected clusters grayed in all three views", async () => {
    const { app, root } = mount();
    await app.start(fixtures.base);

    const dots = root.querySelectorAll(`circle.dot[data-cluster="${deselectedId}"]`);
    expect(dots.length).toBeGreaterThan(0);
    for (const dot of dots) {
      expect(dot.getAttribute("fill")).toBe(DESELECTED_COLOR);
      expect(dot.classList.contains("deselected")).toBe(true);
    }

    const panel = root.querySelector(`.cluster-panel[data-cluster="${deselectedId}"]`)!;
    expect(panel.classList.contains("deselected")).toBe(true);
    const selectedPanel = root.querySelector(
      `.cluster-panel[data-cluster="${fixtures.base.clusters[0].id}"]`,
    )!;
    expect(selectedPanel.classList.contains("deselected")).toBe(false);

    const cells = root.querySelectorAll(
      `.covariate-view [data-cluster="${deselectedId}"]`,
    );
    expect(cells.length).toBeGreaterThan(0);
    for (const cell of cells) {
      expect(cell.classList.contains("deselected")).toBe(true);
    }
  });

  it("toggling a cluster shows the server ATE within one version", async () => {
    const { app, root } = mount();
    await app.start(fixtures.base);
    const header = root.querySelector(".ate-header")!;
    expect(header.getAttribute("data-ate")).toBe(String(fixtures.base.ate.value));

    await app.toggle(deselectedId);

    expect(header.getAttribute("data-version")).toBe(String(fixtures.base.version + 1));
    expect(header.getAttribute("data-ate")).toBe(String(fixtures.toggled.ate.value));
    const panel = root.querySelector(`.cluster-panel[data-cluster="${deselectedId}"]`)!;
    expect(panel.classList.contains("deselected")).toBe(false);
  });

  it("brush-and-exclude strikes the outlier and updates axes and ATE", async () => {
    const { app, server, root } = mount();
    await app.start(fixtures.base);
    await app.toggle(deselectedId);

    const outlier = fixtures.toggled.points.reduce((a, b) =>
      b.t_value > a.t_value ? b : a,
    );
    const xmaxBefore = Number(
      document.getElementById("e")!.getAttribute("data-xmax"),
    );
    expect(xmaxBefore).toBe(outlier.t_value);

    const ids = app.scatter.brushRegion(
      outlier.x - 1e-9, outlier.y - 1e-9, outlier.x + 1e-9, outlier.y + 1e-9,
    );
    expect(ids).toContain(outlier.row_id);
    await app.excludeBrushed();

    const sent = server.requests.find((r) => r.body?.action === "exclude")!;
    expect(sent.body!.payload.row_ids).toEqual(ids);

    const header = root.querySelector(".ate-header")!;
    expect(header.getAttribute("data-ate")).toBe(String(fixtures.excluded.ate.value));
    const xmaxAfter = Number(
      document.getElementById("e")!.getAttribute("data-xmax"),
    );
    expect(xmaxAfter).toBeLessThan(xmaxBefore);
    // the struck row fades in the scatter instead of disappearing
    const dot = root.querySelector(`circle[data-row-id="${outlier.row_id}"]`)!;
    expect(dot.classList.contains("excluded")).toBe(true);
  });

  it("applies pushed snapshots and drops stale ones", async () => {
    const { app, server, root } = mount();
    await app.start(fixtures.base);
    const es = server.eventSources[0];
    es.emit("snapshot", fixtures.toggled);
    const header = root.querySelector(".ate-header")!;
    expect(header.getAttribute("data-version")).toBe(String(fixtures.toggled.version));
    es.emit("snapshot", fixtures.base); // stale replay must not roll back
    expect(header.getAttribute("data-version")).toBe(String(fixtures.toggled.version));
    app.stop();
    expect(es.closed).toBe(true);
  });
});
