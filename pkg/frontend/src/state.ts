import type { Snapshot } from "./types";

export type Listener = (snap: Snapshot) => void;

/** Holds the latest snapshot and fans updates out to the views.
 *  Stale pushes (version <= current) are dropped so an SSE replay can
 *  never roll the display back. */
export class Store {
  private snap: Snapshot | null = null;
  private listeners: Listener[] = [];

  get snapshot(): Snapshot {
    if (!this.snap) throw new Error("no snapshot yet");
    return this.snap;
  }

  get version(): number {
    return this.snap?.version ?? -1;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    if (this.snap) fn(this.snap);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  /** Accept a snapshot if it is newer; returns whether it was applied. */
  push(snap: Snapshot): boolean {
    if (this.snap && snap.version <= this.snap.version) return false;
    this.snap = snap;
    for (const fn of [...this.listeners]) fn(snap);
    return true;
  }
}
