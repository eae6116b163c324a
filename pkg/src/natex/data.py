"""Tabular data ingestion, variable roles, and row masking."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, replace

MISSING_TOKENS = {"", "?"}

KINDS = ("numeric", "categorical", "ordinal", "temporal")
ROLES = ("treatment", "outcome", "covariate", "excluded")

# name tokens marking a column as temporal (camelCase / snake_case aware)
_TEMPORAL_TOKENS = {"year", "yr", "mo", "month", "date", "day"}
_ID_TOKENS = {"id", "idx", "index", "order", "pid"}


class DataError(Exception):
    """Raised for malformed input tables or invalid role assignments."""


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    role: str = "excluded"

    @property
    def analyzable(self):
        return self.role in ("treatment", "outcome", "covariate")


@dataclass(frozen=True)
class RowMask:
    """Set of excluded row-ids. Immutable value object."""

    excluded_ids: frozenset = frozenset()

    def with_excluded(self, ids):
        return RowMask(self.excluded_ids | frozenset(ids))

    def __contains__(self, row_id):
        return row_id in self.excluded_ids


@dataclass(frozen=True)
class Dataset:
    """Immutable column-typed table with stable integer row-ids.

    ``values[col][i]`` is the cell for row-id ``row_ids[i]``; missing cells
    are ``None``. Row-ids are assigned by file order starting at 0 and are
    never reused.
    """

    name: str
    columns: tuple  # of ColumnSchema
    row_ids: tuple  # of int
    values: dict  # column name -> tuple of float | str | None

    def __post_init__(self):
        assert len(set(self.row_ids)) == len(self.row_ids)

    @property
    def n_rows(self):
        return len(self.row_ids)

    def column(self, name):
        for c in self.columns:
            if c.name == name:
                return c
        raise DataError(f"unknown column: {name!r}")

    def column_names(self):
        return [c.name for c in self.columns]

    def columns_with_role(self, *roles):
        return [c.name for c in self.columns if c.role in roles]

    @property
    def treatments(self):
        return self.columns_with_role("treatment")

    @property
    def outcomes(self):
        return self.columns_with_role("outcome")

    @property
    def covariates(self):
        return self.columns_with_role("covariate")


def _tokens(name):
    # split camelCase and snake_case into lowercase tokens
    parts = re.sub(r"([a-z0-9])([A-Z])", r"\1 \2", name)
    parts = re.sub(r"([A-Za-z])([0-9])", r"\1 \2", parts)
    return {t.lower() for t in re.split(r"[\s_\-.]+", parts) if t}


def _infer_kind(name, cells):
    non_missing = [c for c in cells if c is not None]
    if not non_missing:
        return "categorical"
    try:
        for c in non_missing:
            float(c)
    except (TypeError, ValueError):
        return "categorical"
    toks = _tokens(name)
    if toks & _TEMPORAL_TOKENS:
        return "temporal"
    if toks & _ID_TOKENS:
        return "ordinal"
    return "numeric"


def load_csv(source, name="dataset", delimiter=",", header=True):
    """Parse a delimited text table into a Dataset.

    ``source`` may be a text string, bytes, or a file-like object. The
    header row is required unless ``header=False``, in which case columns
    are named c0, c1, ... Empty cells and "?" are recorded as missing.

    Raises DataError on empty input or a ragged row (with its line number).
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source, delimiter=delimiter)
    rows = [r for r in reader if r]
    if not rows:
        raise DataError("empty input")
    if header:
        names, body = rows[0], rows[1:]
    else:
        width = len(rows[0])
        names, body = [f"c{i}" for i in range(width)], rows
    ncol = len(names)
    cells = {n: [] for n in names}
    for lineno, row in enumerate(body, start=2 if header else 1):
        if len(row) != ncol:
            raise DataError(
                f"ragged row at line {lineno}: expected {ncol} fields, got {len(row)}"
            )
        for n, cell in zip(names, row):
            cell = cell.strip()
            cells[n].append(None if cell in MISSING_TOKENS else cell)
    columns = []
    values = {}
    for n in names:
        kind = _infer_kind(n, cells[n])
        if kind in ("numeric", "ordinal", "temporal"):
            values[n] = tuple(None if c is None else float(c) for c in cells[n])
        else:
            values[n] = tuple(cells[n])
        columns.append(ColumnSchema(n, kind))
    return Dataset(
        name=name,
        columns=tuple(columns),
        row_ids=tuple(range(len(body))),
        values=values,
    )


def save_csv(ds, stream, delimiter=","):
    """Write a Dataset back out in the load_csv input format."""
    w = csv.writer(stream, delimiter=delimiter, lineterminator="\n")
    names = ds.column_names()
    w.writerow(names)
    cols = [ds.values[n] for n in names]
    kinds = {n: ds.column(n).kind for n in names}
    for i in range(ds.n_rows):
        row = []
        for n, col in zip(names, cols):
            v = col[i]
            if v is None:
                row.append("?")
            elif kinds[n] != "categorical":
                row.append(format(v, "g"))
            else:
                row.append(v)
        w.writerow(row)


def assign_roles(ds, treatments=(), outcomes=(), force_exclude=(), keep=()):
    """Return a copy of ``ds`` with variable roles assigned.

    Named outcome/treatment columns get their roles. Every other numeric
    column becomes a treatment when no treatments were named (every
    non-outcome variable is a candidate treatment), or a covariate when an
    explicit treatment list was given. Non-numeric, temporal, and ordinal
    columns are auto-excluded unless listed in ``keep``; ``force_exclude``
    drops columns regardless of kind.

    Raises DataError on unknown names or overlapping treatment/outcome lists.
    """
    treatments, outcomes = list(treatments), list(outcomes)
    overlap = set(treatments) & set(outcomes)
    if overlap:
        raise DataError(f"columns in both treatment and outcome lists: {sorted(overlap)}")
    for n in [*treatments, *outcomes, *force_exclude, *keep]:
        ds.column(n)  # raises on unknown name
    new_cols = []
    for c in ds.columns:
        if c.name in force_exclude:
            role = "excluded"
        elif c.name in outcomes:
            role = "outcome"
        elif c.name in treatments:
            role = "treatment"
        elif c.kind == "numeric" or c.name in keep:
            role = "covariate" if treatments else "treatment"
        else:
            role = "excluded"
        new_cols.append(replace(c, role=role))
    return replace(ds, columns=tuple(new_cols))


def active_rows(ds, mask, needed):
    """Row-ids not masked and complete in every ``needed`` column, ascending."""
    cols = [ds.values[ds.column(n).name] for n in needed]
    out = []
    for i, rid in enumerate(ds.row_ids):
        if rid in mask:
            continue
        if any(col[i] is None for col in cols):
            continue
        out.append(rid)
    return out
