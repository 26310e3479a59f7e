"""CSV ingestion and delimited/JSON export.

Dialect: comma separated, '.' decimal mark, UTF-8, mandatory header.
Floats are written with 17 significant digits so that re-parsing gives
back the same doubles; undefined values are written as empty fields.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, MissingResponse, ParseError
from .linalg import Dataset


@dataclass(frozen=True)
class BundledDataset:
    filename: str
    response: str
    id_column: str
    description: str


BUNDLED = {
    "alcohol_tobacco": BundledDataset(
        "alcohol_tobacco.csv", "alcohol", "region",
        "household alcohol vs tobacco spending, 11 regions of Great Britain"),
    "smoking_cancer": BundledDataset(
        "smoking_cancer.csv", "cig", "state",
        "1960 cigarette sales vs four cancer death rates, 43 states + DC"),
}


def bundled_path(name: str) -> Path:
    try:
        entry = BUNDLED[name]
    except KeyError:
        raise ConfigError(f"unknown bundled dataset {name!r}; choose from {sorted(BUNDLED)}") from None
    return Path(str(resources.files("recdiag") / "data" / entry.filename))


def _parse_float(text: str, row: int, col: str) -> float:
    text = text.strip()
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"cannot parse {text!r} as a number", row=row, col=col) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r}", row=row, col=col)
    return value


def load_csv(path, response: str, intercept: bool = True, id_column: str | None = None,
             predictors: Sequence[str] | None = None) -> Dataset:
    """Read a regression dataset.

    Every column other than the response and the id column is a predictor
    unless ``predictors`` narrows the selection. Row numbers in errors are
    file line numbers (header is line 1).
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not UTF-8: {exc}") from None
    if not rows or not any(h.strip() for h in rows[0]):
        raise ParseError(f"{path} has no header row", row=1)
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise ParseError("duplicate column names in header", row=1)
    if response not in header:
        raise MissingResponse(f"response column {response!r} not in header {header}", row=1)
    if id_column is not None and id_column not in header:
        raise ParseError(f"id column {id_column!r} not in header", row=1)
    if predictors is None:
        predictors = [h for h in header if h not in (response, id_column)]
    else:
        missing = [c for c in predictors if c not in header]
        if missing:
            raise ParseError(f"predictor column(s) {missing} not in header", row=1)
    if not predictors and not intercept:
        raise ParseError("no predictor columns and no intercept", row=1)

    col_idx = {h: j for j, h in enumerate(header)}
    X_rows, y, ids = [], [], []
    for line_no, rec in enumerate(rows[1:], start=2):
        if not rec or all(not f.strip() for f in rec):
            continue
        if len(rec) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(rec)}", row=line_no)
        X_rows.append([_parse_float(rec[col_idx[c]], line_no, c) for c in predictors])
        y.append(_parse_float(rec[col_idx[response]], line_no, response))
        ids.append(rec[col_idx[id_column]].strip() if id_column else str(len(ids) + 1))
    if not y:
        raise ParseError(f"{path} has no data rows")
    if len(set(ids)) != len(ids):
        raise ParseError(f"id column {id_column!r} has duplicate values")
    X = np.array(X_rows, dtype=float).reshape(len(y), len(predictors))
    return Dataset.from_arrays(X, y, labels=list(predictors), row_ids=ids, intercept=intercept)


def load_bundled(name: str) -> Dataset:
    entry = BUNDLED.get(name)
    path = bundled_path(name)
    return load_csv(path, entry.response, intercept=True, id_column=entry.id_column)


def fmt(value) -> str:
    """Serialize a cell: 17 significant digits for floats, '' for nan/None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return ""
    return format(v, ".17g")


def parse_cell(text: str) -> float:
    return float("nan") if text == "" else float(text)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def read_csv_table(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        return None if math.isnan(v) else float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
