"""JSON schemas, value coercion, and canonical report emission.

All documents carry `"schema": "oiso/1"`. Exact mode accepts integers and
"p/q" strings and refuses bare floats, so precision is never silently
downgraded; float mode accepts any real number and also "p/q" strings.
Reports serialize with sorted keys and fixed indentation, carry a sha256
digest of their own canonical payload, and contain nothing run-dependent
(timing is reported on stderr, never in the payload), so identical inputs,
seed, and mode produce byte-identical report files.
"""
from __future__ import annotations

import hashlib
import json
import math
from fractions import Fraction
from typing import Optional

import numpy as np

from .compactify import SampledSpace, SequenceSpec, WeightedCompositionSpec
from .cones import OperatorModel
from .spaces import FunctionFamily, PointSpace

__all__ = [
    "SCHEMA",
    "coerce_number",
    "parse_space",
    "parse_family",
    "parse_operator",
    "parse_compactify_spec",
    "load_json",
    "jsonable",
    "canonical_json",
    "report_digest",
    "build_report",
    "file_digest",
]

SCHEMA = "oiso/1"


def load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: top-level JSON must be an object")
    schema = doc.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise ValueError(f"{path}: unsupported schema {schema!r} (expected {SCHEMA!r})")
    return doc


def coerce_number(x, exact: bool):
    """One JSON scalar to the requested arithmetic.

    Exact mode: integers and "p/q" strings only; floats are refused rather
    than rounded. Float mode: any finite real, plus "p/q" strings.
    """
    if isinstance(x, bool):
        raise ValueError("booleans are not numeric entries")
    if exact:
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            return Fraction(x)
        if isinstance(x, float):
            raise ValueError(
                f"exact mode refuses the float {x!r}; write an integer or a 'p/q' string")
        raise ValueError(f"not a rational entry: {x!r}")
    if isinstance(x, (int, float)):
        v = float(x)
    elif isinstance(x, str):
        v = float(Fraction(x))
    else:
        raise ValueError(f"not a numeric entry: {x!r}")
    if not math.isfinite(v):
        raise ValueError(f"entries must be finite, got {x!r}")
    return v


def _coerce_matrix(rows, exact: bool) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValueError("a matrix must be a non-empty list of rows")
    data = [[coerce_number(v, exact) for v in row] for row in rows]
    widths = {len(r) for r in data}
    if len(widths) != 1:
        raise ValueError("matrix rows must have equal length")
    if exact:
        m = np.empty((len(data), len(data[0])), dtype=object)
        for i, row in enumerate(data):
            for j, v in enumerate(row):
                m[i, j] = v
        return m
    return np.array(data, dtype=float)


def parse_space(doc) -> PointSpace:
    """A space document: a list of labels, or {"labels": [...], "metric": [[...]]}"""
    if isinstance(doc, list):
        return PointSpace(tuple(str(x) for x in doc))
    if isinstance(doc, dict):
        labels = doc.get("labels")
        if labels is None:
            raise ValueError("space document needs 'labels'")
        metric = doc.get("metric")
        if metric is not None:
            metric = np.array([[float(v) for v in row] for row in metric])
        return PointSpace(tuple(str(x) for x in labels), metric=metric)
    raise ValueError("space document must be a list of labels or an object")


def parse_family(doc, exact: bool = False) -> FunctionFamily:
    """A family document: a space document (full family), or
    {"space": ..., "generators": [[...]], "names": [...]}"""
    if isinstance(doc, list):
        return FunctionFamily.full(parse_space(doc), exact=exact)
    if not isinstance(doc, dict):
        raise ValueError("family document must be a list of labels or an object")
    if "space" not in doc and "labels" in doc:
        return FunctionFamily.full(parse_space(doc), exact=exact)
    space = parse_space(doc["space"])
    gens = doc.get("generators")
    if gens is None:
        return FunctionFamily.full(space, exact=exact)
    matrix = _coerce_matrix(gens, exact)
    names = doc.get("names")
    if names is not None:
        names = tuple(str(x) for x in names)
    return FunctionFamily(space, matrix, names=names)


def parse_operator(doc: dict, mode: str = "float") -> OperatorModel:
    """An operator document:

    {"schema": "oiso/1", "matrix": [[...]], "basis": "point"|"generator",
     "domain": <family doc, optional>, "codomain": <family doc, optional>}

    Missing families default to full families sized by the matrix.
    """
    if mode not in ("float", "exact"):
        raise ValueError("mode must be 'float' or 'exact'")
    exact = mode == "exact"
    if "matrix" not in doc:
        raise ValueError("operator document needs 'matrix'")
    matrix = _coerce_matrix(doc["matrix"], exact)
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError("operator matrix must be square")
    basis = doc.get("basis", "point")
    n = matrix.shape[0]
    if "domain" in doc:
        dom = parse_family(doc["domain"], exact=exact)
    else:
        dom = FunctionFamily.full(PointSpace.discrete(n, "x"), exact=exact)
    if "codomain" in doc:
        cod = parse_family(doc["codomain"], exact=exact)
    else:
        cod = FunctionFamily.full(PointSpace.discrete(n, "y"), exact=exact)
    return OperatorModel(matrix, domain=dom, codomain=cod, basis=basis)


def _parse_sampled_space(doc: dict, default_name: str) -> SampledSpace:
    if not isinstance(doc, dict):
        raise ValueError("sampled-space document must be an object")
    samples = doc.get("samples")
    gens = doc.get("generators")
    if samples is None or gens is None:
        raise ValueError("sampled-space document needs 'samples' and 'generators'")
    domain = doc.get("interval")
    if domain is not None:
        if len(domain) != 4:
            raise ValueError("'interval' is [lo, hi, lo_open, hi_open]")
        domain = (float(domain[0]), float(domain[1]), bool(domain[2]), bool(domain[3]))
    return SampledSpace(tuple(float(s) for s in samples),
                        tuple(str(g) for g in gens),
                        name=str(doc.get("name", default_name)), domain=domain)


def _parse_sequences(docs) -> list:
    out = []
    for i, d in enumerate(docs or []):
        name = str(d.get("name", f"seq{i}"))
        n = int(d.get("n", 10000))
        if "rule" in d:
            out.append(SequenceSpec(name=name, n=n, rule=str(d["rule"])))
        elif "points" in d:
            out.append(SequenceSpec(name=name, n=min(n, len(d["points"])),
                                    points=tuple(float(p) for p in d["points"])))
        else:
            raise ValueError(f"sequence {name!r} needs 'rule' or 'points'")
    return out


def parse_compactify_spec(doc: dict):
    """A compactification document:

    {"schema": "oiso/1",
     "domain": {"samples": [...], "generators": ["t", ...], "name": "X"},
     "codomain": {... optional, defaults to the domain ...},
     "sequences": [...], "sequences_codomain": [... optional ...],
     "operator": {"pullback": "...", "weight": "..."}  (optional)}

    Returns (x_space, y_space, seqs_x, seqs_y, operator_or_None).
    """
    if "domain" not in doc:
        raise ValueError("compactification document needs 'domain'")
    x_space = _parse_sampled_space(doc["domain"], "X")
    y_space = (_parse_sampled_space(doc["codomain"], "Y")
               if "codomain" in doc else x_space)
    seqs_x = _parse_sequences(doc.get("sequences"))
    seqs_y = (_parse_sequences(doc.get("sequences_codomain"))
              if "sequences_codomain" in doc else seqs_x)
    op = None
    if "operator" in doc:
        od = doc["operator"]
        if "pullback" not in od or "weight" not in od:
            raise ValueError("operator document needs 'pullback' and 'weight'")
        op = WeightedCompositionSpec(str(od["pullback"]), str(od["weight"]))
    return x_space, y_space, seqs_x, seqs_y, op


def jsonable(x):
    """Recursively convert values to a canonical JSON-safe form.

    Fractions become "p/q" strings, numpy scalars become Python scalars,
    non-finite floats become "inf"/"-inf" strings (extended coordinates),
    tuples become lists.
    """
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            raise ValueError("nan is not reportable")
        return v
    if x is None or isinstance(x, str):
        return x
    raise TypeError(f"not JSON-serializable: {type(x).__name__}")


def canonical_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2,
                      ensure_ascii=False, allow_nan=False) + "\n"


def report_digest(payload: dict) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def build_report(command: str, result: dict, inputs: Optional[dict] = None,
                 settings: Optional[dict] = None) -> dict:
    """Assemble the canonical report: payload plus its own digest."""
    payload = {
        "schema": SCHEMA,
        "command": command,
        "inputs": inputs or {},
        "settings": settings or {},
        "result": result,
    }
    report = dict(payload)
    report["digest"] = report_digest(payload)
    return report
