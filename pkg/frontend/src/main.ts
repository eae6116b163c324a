import { App } from "./app";
import { Client } from "./api";

/** Browser entry point. Expects ?session=<id> (and optionally
 *  ?server=<base-url>) or creates a demo session against an uploaded CSV
 *  chosen via the file picker. */
async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("server") ?? "";
  const client = new Client(base);

  const els = {
    scatter: document.getElementById("scatter")!,
    effect: document.getElementById("effect")!,
    covariates: document.getElementById("covariates")!,
    excludeButton: document.getElementById("exclude-btn")!,
  };

  let sessionId = params.get("session");
  let initial;
  if (!sessionId) {
    const picker = document.getElementById("csv-file") as HTMLInputElement;
    const file = picker?.files?.[0];
    if (!file) {
      document.getElementById("status")!.textContent =
        "Pass ?session=<id> or choose a CSV to analyze.";
      return;
    }
    const outcome = (document.getElementById("outcome") as HTMLInputElement).value;
    const treatment = (document.getElementById("treatment") as HTMLInputElement).value;
    const ds = await client.uploadDataset(await file.text(), file.name, [outcome]);
    const created = await client.createSession({ dataset: ds.id, treatment, outcome });
    sessionId = created.id;
    initial = created.snapshot;
  }

  const app = new App(client, sessionId, els);
  await app.start(initial);
  window.addEventListener("beforeunload", () => app.stop());
}

void boot();
