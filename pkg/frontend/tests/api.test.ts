import { describe, expect, it } from "vitest";

import { Client } from "../src/api";
import { Store } from "../src/state";
import { FakeServer, fixtures } from "./fake_server";

describe("client", () => {
  it("shapes dataset and session requests", async () => {
    const calls: { url: string; init?: RequestInit }[] = [];
    const client = new Client("http://x", async (url, init) => {
      calls.push({ url, init });
      return new Response(JSON.stringify({ id: "d1", snapshot: fixtures.base }), {
        status: 201,
      });
    });
    await client.uploadDataset("a,b\n1,2\n", "tiny.csv", ["b"]);
    expect(calls[0].url).toBe("http://x/datasets?outcomes=b");
    expect(JSON.parse(calls[0].init!.body as string)).toEqual({
      name: "tiny.csv",
      csv: "a,b\n1,2\n",
    });
    await client.createSession({ dataset: "d1", treatment: "a", outcome: "b", k: 3 });
    expect(calls[1].url).toBe("http://x/sessions");
    expect(JSON.parse(calls[1].init!.body as string).k).toBe(3);
  });

  it("raises on HTTP errors with the server detail", async () => {
    const client = new Client("", async () =>
      new Response(JSON.stringify({ detail: "stale version" }), { status: 409 }),
    );
    await expect(
      client.action("s1", { action: "set_k", payload: { k: 2 } }),
    ).rejects.toThrow(/409/);
  });

  it("enforces optimistic concurrency like the real endpoint", async () => {
    const server = new FakeServer();
    await expect(
      server.client.action("s1", {
        action: "toggle_cluster",
        payload: { cluster_id: 0 },
        expect_version: fixtures.base.version + 5,
      }),
    ).rejects.toThrow(/409/);
  });
});

describe("store", () => {
  it("notifies subscribers in order and exposes the version", () => {
    const store = new Store();
    const seen: number[] = [];
    store.subscribe((s) => seen.push(s.version));
    expect(store.push(fixtures.base)).toBe(true);
    expect(store.push(fixtures.toggled)).toBe(true);
    expect(store.push(fixtures.base)).toBe(false);
    expect(seen).toEqual([fixtures.base.version, fixtures.toggled.version]);
    expect(store.version).toBe(fixtures.toggled.version);
  });

  it("replays the current snapshot to late subscribers", () => {
    const store = new Store();
    store.push(fixtures.base);
    let got = -1;
    store.subscribe((s) => {
      got = s.version;
    });
    expect(got).toBe(fixtures.base.version);
  });
});
