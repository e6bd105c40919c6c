"""Graph files, generator specs, weight expressions and report serialization.

Graph file (JSON)::

    {"vertices": [...], "edges": [[u, v, b], ...], "q": {vertex: value}, "m": {vertex: value}}

Generator spec (JSON)::

    {"generator": "lattice" | "tree" | "halfline" | "halfline_dirichlet",
     "params": {...}, "q": number or {vertex: value}, "m": ..., "anchor": ...}

Vertex keys in ``q``/``m`` objects are labels: ``"3"``, ``"a"``, or
``"1,0,-2"`` for lattice coordinates.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import SGLError
from .graph import (
    ExhaustionFamily,
    GraphModel,
    default_family,
    from_edges,
    halfline,
    halfline_dirichlet,
    lattice,
    normalize_vertex,
    parse_vertex_label,
    tree,
    vertex_label,
)

SCHEMA_VERSION = 1
GENERATORS = ("lattice", "tree", "halfline", "halfline_dirichlet")


class InputError(SGLError, ValueError):
    """Malformed graph file, generator spec, or flag value."""


def _label_map(obj, like):
    if obj is None:
        return None
    if isinstance(obj, (int, float)):
        return float(obj)
    if not isinstance(obj, dict):
        raise InputError("q and m must be numbers or objects keyed by vertex label")
    try:
        return {parse_vertex_label(str(k), like): float(v) for k, v in obj.items()}
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad vertex label or value: {exc}") from None


def model_from_spec(spec: dict) -> GraphModel:
    """Build a :class:`GraphModel` from a parsed graph file or generator spec."""
    if not isinstance(spec, dict):
        raise InputError("graph spec must be a JSON object")
    if "generator" in spec:
        gen = spec["generator"]
        params = dict(spec.get("params") or {})
        params.pop("ball", None)
        if gen not in GENERATORS:
            raise InputError(f"unknown generator {gen!r}; expected one of {GENERATORS}")
        like = (0,) * int(params.get("d", 1)) if gen == "lattice" and int(params.get("d", 1)) > 1 else (() if gen == "tree" else 0)
        q = _label_map(spec.get("q"), like)
        m = _label_map(spec.get("m"), like)
        try:
            builder = {"lattice": lattice, "tree": tree, "halfline": halfline, "halfline_dirichlet": halfline_dirichlet}[gen]
            model = builder(**params, q=q, m=m)
        except TypeError as exc:
            raise InputError(f"bad params for {gen}: {exc}") from None
        model.spec = {k: spec[k] for k in ("generator", "params", "q", "m") if k in spec}
        return model
    if "vertices" not in spec or "edges" not in spec:
        raise InputError("graph file needs 'vertices' and 'edges' (or a 'generator')")
    vertices = [normalize_vertex(v) for v in spec["vertices"]]
    if not vertices:
        raise InputError("graph has no vertices")
    like = vertices[0]
    try:
        edges = [(normalize_vertex(u), normalize_vertex(v), float(b)) for u, v, b in spec["edges"]]
    except (TypeError, ValueError):
        raise InputError("edges must be [u, v, b] triples") from None
    q = _label_map(spec.get("q") or {}, like)
    m = _label_map(spec.get("m") or {}, like)
    return from_edges(vertices, edges, q=q, m=m)


def family_from_spec(spec: dict, anchor=None) -> ExhaustionFamily:
    """Model plus its standard exhaustion; ``anchor`` overrides the spec's."""
    model = model_from_spec(spec)
    if anchor is None and spec.get("anchor") is not None:
        anchor = normalize_vertex(spec["anchor"])
    ball = (spec.get("params") or {}).get("ball", "graph")
    try:
        return default_family(model, anchor=anchor, ball=ball)
    except SGLError as exc:
        raise InputError(str(exc)) from None


def load_spec(path) -> dict:
    """Read and parse a JSON spec; any failure is an :class:`InputError`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from None


def model_to_spec(model: GraphModel) -> dict:
    """Serializable description of a model built from a file or generator."""
    if model.spec is None:
        raise InputError("model has no serializable presentation (derived or callable-based)")
    return json.loads(json.dumps(model.spec))


def save_spec(model: GraphModel, path):
    Path(path).write_text(json.dumps(model_to_spec(model), indent=2, sort_keys=True) + "\n")


def parse_anchor(text: str | None, family_like=None):
    if text is None:
        return None
    text = text.strip()
    if text.startswith("["):
        try:
            return normalize_vertex(json.loads(text))
        except json.JSONDecodeError:
            raise InputError(f"bad anchor {text!r}") from None
    if text in ("()", ""):
        return ()
    return parse_vertex_label(text)


# ---------------------------------------------------------------------------
# weights


def vertex_norm(v, kind: str | None = None) -> float:
    """``|v|``: tree depth when ``kind == "tree"``, else ℓ¹ norm or absolute value."""
    if isinstance(v, tuple):
        return float(len(v)) if kind == "tree" else float(sum(abs(c) for c in v))
    try:
        return float(abs(v))
    except TypeError:
        raise InputError(f"no norm for vertex {v!r}") from None


def parse_weight(text: str, model: GraphModel | None = None):
    """Weight expression ``kind:param`` to a per-vertex callable.

    kinds: ``const:c``, ``geometric:r`` (``r^|x|``), ``hardy:c``
    (``c/|x|²``), ``inv1p2:c`` (``c/(1+|x|²)``), ``indicator:v``.
    """
    if not text or ":" not in text:
        raise InputError(f"weight must look like kind:param, got {text!r}")
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    gk = getattr(model, "kind", None)

    def norm(x):
        return vertex_norm(x, gk)

    if kind == "indicator":
        target = parse_anchor(arg)
        return lambda x: 1.0 if x == target else 0.0
    try:
        c = float(arg)
    except ValueError:
        raise InputError(f"bad weight parameter {arg!r}") from None
    if kind == "const":
        return lambda x: c
    if kind == "geometric":
        return lambda x: c ** norm(x)
    if kind == "hardy":
        return lambda x: c / norm(x) ** 2 if norm(x) > 0 else math.inf
    if kind == "inv1p2":
        return lambda x: c / (1.0 + norm(x) ** 2)
    raise InputError(f"unknown weight kind {kind!r}")


def report_document(kind: str, body: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": kind, **body}


def dumps(doc) -> str:
    """Deterministic JSON text (sorted keys, fixed separators, trailing newline)."""
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False, default=_default) + "\n"


def _default(obj):
    import numpy as np

    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    return vertex_label(obj)
