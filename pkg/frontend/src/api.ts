import type { ActionRequest, ActionResponse, SessionCreated, Snapshot } from "./types";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface EventSourceLike {
  onmessage: ((ev: MessageEvent) => void) | null;
  addEventListener(type: string, cb: (ev: MessageEvent) => void): void;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

/** Thin typed client for the analysis server; transports are injectable
 *  so tests can run without a network. */
export class Client {
  constructor(
    private base: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
    private eventSourceFactory: EventSourceFactory = (url) =>
      new EventSource(url) as unknown as EventSourceLike,
  ) {}

  private async json<T>(url: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.base + url, init);
    if (!res.ok) {
      const body = await res.text();
      throw new Error(`${init?.method ?? "GET"} ${url} -> ${res.status}: ${body}`);
    }
    return (await res.json()) as T;
  }

  uploadDataset(csv: string, name: string, outcomes: string[]): Promise<{ id: string }> {
    const q = encodeURIComponent(outcomes.join(","));
    return this.json(`/datasets?outcomes=${q}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ name, csv }),
    });
  }

  createSession(body: {
    dataset: string;
    treatment: string;
    outcome: string;
    k?: number;
    seed?: number;
    method?: string;
  }): Promise<SessionCreated> {
    return this.json("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getSnapshot(sessionId: string): Promise<Snapshot> {
    return this.json(`/sessions/${sessionId}/snapshot`);
  }

  action(sessionId: string, req: ActionRequest): Promise<ActionResponse> {
    return this.json(`/sessions/${sessionId}/actions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  /** Subscribe to pushed snapshots; returns an unsubscribe function. */
  subscribe(sessionId: string, onSnapshot: (snap: Snapshot) => void): () => void {
    const es = this.eventSourceFactory(`${this.base}/sessions/${sessionId}/events`);
    const handler = (ev: MessageEvent) => {
      onSnapshot(JSON.parse(ev.data as string) as Snapshot);
    };
    es.addEventListener("snapshot", handler);
    return () => es.close();
  }
}
