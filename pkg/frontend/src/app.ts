import { Client } from "./api";
import { Store } from "./state";
import { CovariateView } from "./views/covariates";
import { EffectView } from "./views/effect";
import { ScatterView } from "./views/scatter";
import type { Snapshot } from "./types";

export interface AppElements {
  scatter: HTMLElement;
  effect: HTMLElement;
  covariates: HTMLElement;
  excludeButton?: HTMLElement;
}

/** Wires the three coordinated views to one server session: every user
 *  gesture becomes a server action, every server push re-renders. */
export class App {
  readonly store = new Store();
  readonly scatter: ScatterView;
  readonly effect: EffectView;
  readonly covariates: CovariateView;
  private brushed: number[] = [];
  private unsubscribe: (() => void) | null = null;

  constructor(
    private client: Client,
    private sessionId: string,
    els: AppElements,
  ) {
    this.scatter = new ScatterView(els.scatter, {
      onToggle: (id) => void this.toggle(id),
      onBrush: (ids) => {
        this.brushed = ids;
      },
    });
    this.effect = new EffectView(els.effect, {
      onToggle: (id) => void this.toggle(id),
    });
    this.covariates = new CovariateView(els.covariates);
    this.store.subscribe((snap) => this.renderAll(snap));
    els.excludeButton?.addEventListener("click", () => void this.excludeBrushed());
  }

  private renderAll(snap: Snapshot): void {
    this.scatter.render(snap);
    this.effect.render(snap);
    this.covariates.render(snap);
  }

  async start(initial?: Snapshot): Promise<void> {
    this.store.push(initial ?? (await this.client.getSnapshot(this.sessionId)));
    this.unsubscribe = this.client.subscribe(this.sessionId, (snap) =>
      this.store.push(snap),
    );
  }

  stop(): void {
    this.unsubscribe?.();
    this.unsubscribe = null;
  }

  private async act(action: string, payload: Record<string, unknown>): Promise<void> {
    const res = await this.client.action(this.sessionId, {
      action,
      payload,
      expect_version: this.store.version,
    });
    this.store.push(res.snapshot); // the SSE copy arrives too, but is stale by then
  }

  toggle(clusterId: number): Promise<void> {
    return this.act("toggle_cluster", { cluster_id: clusterId });
  }

  async excludeBrushed(): Promise<void> {
    if (!this.brushed.length) return;
    const ids = this.brushed;
    this.brushed = [];
    await this.act("exclude", { row_ids: ids });
  }

  setK(k: number): Promise<void> {
    return this.act("set_k", { k });
  }

  setVariables(treatment: string, outcome: string): Promise<void> {
    return this.act("set_variables", { treatment, outcome });
  }
}
