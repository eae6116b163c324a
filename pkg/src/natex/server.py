"""HTTP facade: datasets, sessions, actions, and a server-push event stream.

Wire bodies are JSON with snake_case field names. Snapshots are sent
whole; embedding coordinates are quantized to 6 significant digits.
"""

from __future__ import annotations

import asyncio
import email.parser
import email.policy
import json
import math
import os
import secrets
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import __version__
from .data import DataError, assign_roles, load_csv
from .embed import EmbedError
from .session import Session, SessionError, check_snapshot

DEFAULT_PORT = int(os.environ.get("NATEX_PORT", "8787"))


def _sig6(x):
    return float(f"{x:.6g}")


def _num(x):
    # JSON has no NaN/inf; send null for undefined numerics
    if x is None or isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def fit_to_wire(f):
    return {
        "slope": _num(f.slope),
        "intercept": _num(f.intercept),
        "stderr": _num(f.stderr_slope),
        "t": _num(f.t_stat),
        "p": _num(f.p_value),
        "n": f.n,
        "defined": f.defined,
    }


def snapshot_to_wire(snap):
    """The exact wire schema shared by the server and CLI reports."""
    clusters = []
    coords_idx = {c: [] for c in range(snap.k)}
    for i, lab in enumerate(snap.labels):
        coords_idx[lab].append(i)
    for c in range(snap.k):
        name, color = snap.cluster_meta[c]
        clusters.append(
            {
                "id": c,
                "name": name,
                "color": color,
                "size": snap.sizes[c],
                "coords_idx": coords_idx[c],
                "fit": fit_to_wire(snap.fits[c]),
                "selected": c in snap.selection,
            }
        )
    points = [
        {
            "row_id": rid,
            "x": _sig6(x),
            "y": _sig6(y),
            "t_value": tv,
            "o_value": ov,
        }
        for rid, (x, y), tv, ov in zip(
            snap.row_ids, snap.coords, snap.t_values, snap.o_values
        )
    ]
    return {
        "version": snap.version,
        "treatment": snap.treatment,
        "outcome": snap.outcome,
        "k": snap.k,
        "seed": snap.seed,
        "method": snap.method,
        "excluded_ids": list(snap.excluded_ids),
        "clusters": clusters,
        "points": points,
        "overall_fit": fit_to_wire(snap.overall_fit),
        "ate": {
            "value": _num(snap.ate.value),
            "n_total": snap.ate.n_total,
            "defined": snap.ate.defined,
            "contributions": [
                {"cluster": c.cluster, "n": c.n, "b": c.b}
                for c in snap.ate.contributions
            ],
        },
        "simpson": {
            "overall_slope": _num(snap.simpson.overall_slope),
            "flagged": list(snap.simpson.flagged),
        },
        "covariate_display": list(snap.covariate_display),
        "covariate_summaries": snap.covariate_summaries,
    }


class DatasetEntry:
    def __init__(self, ds):
        self.ds = ds


class ApiSession:
    def __init__(self, session):
        self.session = session
        self.lock = asyncio.Lock()
        self.subscribers = []  # asyncio.Queue per event-stream client

    def publish(self, snap):
        payload = snapshot_to_wire(snap)
        for q in list(self.subscribers):
            q.put_nowait(payload)


class CreateSessionBody(BaseModel):
    dataset: str
    treatment: str
    outcome: str
    k: Optional[int] = None
    seed: Optional[int] = None
    method: Optional[str] = None


class ActionBody(BaseModel):
    action: str
    payload: dict = {}
    expect_version: Optional[int] = None


def _parse_csv_upload(content_type, body):
    """Accept multipart/form-data, raw CSV text, or {"name","csv"} JSON."""
    if content_type and content_type.startswith("multipart/form-data"):
        msg = email.parser.BytesParser(policy=email.policy.HTTP).parsebytes(
            b"Content-Type: " + content_type.encode() + b"\r\n\r\n" + body
        )
        for part in msg.iter_parts():
            fname = part.get_filename()
            if fname or part.get_param("name", header="content-disposition") == "file":
                payload = part.get_payload(decode=True)
                return fname or "dataset", payload.decode("utf-8")
        raise HTTPException(422, "multipart body has no file part")
    if content_type and content_type.startswith("application/json"):
        doc = json.loads(body)
        if "csv" not in doc:
            raise HTTPException(422, "JSON upload needs a 'csv' field")
        return doc.get("name", "dataset"), doc["csv"]
    return "dataset", body.decode("utf-8")


def create_app():
    app = FastAPI(title="natex", version=__version__)
    datasets = {}
    sessions = {}

    def _dataset(dataset_id):
        if dataset_id not in datasets:
            raise HTTPException(404, f"unknown dataset {dataset_id}")
        return datasets[dataset_id]

    def _session(session_id):
        if session_id not in sessions:
            raise HTTPException(404, f"unknown session {session_id}")
        return sessions[session_id]

    def _schema(entry, dataset_id):
        return {
            "id": dataset_id,
            "name": entry.ds.name,
            "n_rows": entry.ds.n_rows,
            "columns": [
                {"name": c.name, "kind": c.kind, "role": c.role}
                for c in entry.ds.columns
            ],
        }

    @app.post("/datasets", status_code=201)
    async def upload_dataset(request: Request):
        body = await request.body()
        name, text = _parse_csv_upload(request.headers.get("content-type"), body)
        try:
            ds = load_csv(text, name=name)
        except DataError as e:
            raise HTTPException(422, str(e))
        params = request.query_params
        outcomes = [c for c in params.get("outcomes", "").split(",") if c]
        treatments = [c for c in params.get("treatments", "").split(",") if c]
        try:
            ds = assign_roles(ds, treatments=treatments, outcomes=outcomes)
        except DataError as e:
            raise HTTPException(422, str(e))
        dataset_id = secrets.token_hex(8)
        datasets[dataset_id] = DatasetEntry(ds)
        return _schema(datasets[dataset_id], dataset_id)

    @app.get("/datasets/{dataset_id}/schema")
    async def dataset_schema(dataset_id: str):
        return _schema(_dataset(dataset_id), dataset_id)

    @app.post("/sessions", status_code=201)
    async def create_session(body: CreateSessionBody):
        entry = _dataset(body.dataset)
        kwargs = {}
        if body.k is not None:
            kwargs["k"] = body.k
        if body.seed is not None:
            kwargs["seed"] = body.seed
        if body.method is not None:
            kwargs["method"] = body.method
        try:
            sess = Session(entry.ds, body.treatment, body.outcome, **kwargs)
        except (SessionError, EmbedError, DataError) as e:
            raise HTTPException(422, str(e))
        session_id = secrets.token_hex(8)
        sessions[session_id] = ApiSession(sess)
        snap = snapshot_to_wire(sess.snapshot)
        return {"id": session_id, "snapshot": snap}

    @app.get("/sessions/{session_id}/snapshot")
    async def get_snapshot(session_id: str):
        api = _session(session_id)
        return snapshot_to_wire(api.session.snapshot)

    @app.post("/sessions/{session_id}/actions")
    async def apply_action(session_id: str, body: ActionBody):
        api = _session(session_id)
        s = api.session
        handlers = {
            "set_variables": lambda p: s.set_variables(p["treatment"], p["outcome"]),
            "set_k": lambda p: s.set_k(p["k"]),
            "set_selection": lambda p: s.set_selection(p["cluster_ids"]),
            "toggle_cluster": lambda p: s.toggle_cluster(p["cluster_id"]),
            "exclude": lambda p: s.exclude(p["row_ids"]),
            "include_all": lambda p: s.include_all(),
            "rename_cluster": lambda p: s.rename_cluster(
                p["cluster_id"], p.get("name"), p.get("color")
            ),
            "set_covariate_display": lambda p: s.set_covariate_display(p["columns"]),
        }
        if body.action not in handlers:
            raise HTTPException(422, f"unknown action {body.action!r}")
        async with api.lock:
            if body.expect_version is not None and body.expect_version != s.version:
                raise HTTPException(
                    409, f"stale version {body.expect_version}; current is {s.version}"
                )
            try:
                snap = handlers[body.action](body.payload)
            except (SessionError, EmbedError) as e:
                raise HTTPException(422, str(e))
            except (KeyError, TypeError) as e:
                raise HTTPException(422, f"bad payload for {body.action}: {e}")
            check_snapshot(snap)
            wire = snapshot_to_wire(snap)
            api.publish(snap)
        return {"version": snap.version, "snapshot": wire, "warnings": s.last_warnings}

    @app.get("/sessions/{session_id}/events")
    async def event_stream(session_id: str, request: Request):
        api = _session(session_id)
        queue = asyncio.Queue()
        api.subscribers.append(queue)
        queue.put_nowait(snapshot_to_wire(api.session.snapshot))

        async def gen():
            try:
                while True:
                    if await request.is_disconnected():
                        break
                    try:
                        payload = await asyncio.wait_for(queue.get(), timeout=1.0)
                    except asyncio.TimeoutError:
                        yield ": keep-alive\n\n"
                        continue
                    yield (
                        f"id: {payload['version']}\n"
                        f"event: snapshot\n"
                        f"data: {json.dumps(payload)}\n\n"
                    )
            finally:
                api.subscribers.remove(queue)

        return StreamingResponse(gen(), media_type="text/event-stream")

    static_dir = os.environ.get("NATEX_STATIC_DIR")
    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app


def main(port=None):
    import uvicorn

    uvicorn.run(create_app(), host="127.0.0.1", port=port or DEFAULT_PORT)
