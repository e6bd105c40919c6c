"""Weighted graphs with potential and measure, and their finite exhaustions.

A :class:`GraphModel` is presented either by an explicit finite vertex/edge
list or by a generator (a neighbor enumerator plus a membership predicate).
Only locally finite presentations are supported, so every ball is finite
and :func:`region` always terminates.

Vertices are ints, strings, or tuples of ints (lattice coordinates, tree
addresses).  Inside a region they are ordered by :func:`sort_key` so that
all downstream linear algebra is reproducible bit for bit.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
import functools
import itertools
import math
from typing import Callable, Hashable, Iterable

import numpy as np

from .errors import DomainError, UnsupportedPresentationError

Vertex = Hashable

MAX_DEGREE = 100_000


def sort_key(v):
    """Canonical ordering key: ints, then tuples (by length), then strings."""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return (0, 0, int(v))
    if isinstance(v, tuple):
        return (1, len(v), v)
    return (2, 0, str(v))


def normalize_vertex(v):
    """Map JSON-ish vertex representations (lists) to hashable ones."""
    if isinstance(v, list):
        return tuple(normalize_vertex(c) for c in v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def vertex_label(v) -> str:
    """String label used as a JSON object key for a vertex."""
    if isinstance(v, tuple):
        return ",".join(str(c) for c in v)
    return str(v)


def parse_vertex_label(label: str, like=None):
    """Inverse of :func:`vertex_label`, guided by an example vertex."""
    label = label.strip()
    if label.startswith("["):
        import json

        return normalize_vertex(json.loads(label))
    if "," in label or isinstance(like, tuple):
        parts = [p for p in label.strip("()").split(",") if p.strip()]
        return tuple(int(p) for p in parts)
    try:
        return int(label)
    except ValueError:
        return label


def _zero(x):
    return 0.0


def _one(x):
    return 1.0


class GraphModel:
    """Edge weights ``b``, potential ``q`` and measure ``m`` over a vertex set.

    Parameters
    ----------
    neighbors : callable
        ``neighbors(x)`` returns an iterable of ``(y, b(x, y))`` pairs.  Pairs
        with zero weight are ignored.
    contains : callable, optional
        Membership predicate of the vertex universe.  Defaults to membership
        in ``vertices`` when that is given, else everything is accepted.
    potential, measure : callable, optional
        Per-vertex ``q`` (default 0) and ``m`` (default 1).
    vertices : iterable, optional
        Full vertex list for finite presentations.
    name : str
        Human readable tag used in reports.
    spec : dict, optional
        JSON-serializable description (see :mod:`sgl.io`) when one exists.
    """

    def __init__(
        self,
        neighbors: Callable[[Vertex], Iterable[tuple[Vertex, float]]],
        contains: Callable[[Vertex], bool] | None = None,
        potential: Callable[[Vertex], float] | None = None,
        measure: Callable[[Vertex], float] | None = None,
        vertices: Iterable[Vertex] | None = None,
        name: str = "graph",
        spec: dict | None = None,
        max_degree: int = MAX_DEGREE,
    ):
        self._neighbors = neighbors
        self.vertices = None if vertices is None else tuple(sorted(vertices, key=sort_key))
        if contains is None:
            if self.vertices is None:
                contains = lambda x: True  # noqa: E731
            else:
                vset = frozenset(self.vertices)
                contains = vset.__contains__
        self._contains = contains
        self._potential = potential or _zero
        self._measure = measure or _one
        self.name = name
        self.spec = spec
        self.max_degree = max_degree
        self.kind = (spec or {}).get("generator")
        self.potential_is_zero = potential is None

    # -- basic queries -------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self.vertices is not None

    def contains(self, x) -> bool:
        try:
            return bool(self._contains(x))
        except (TypeError, ValueError):
            return False

    def check(self, x):
        if not self.contains(x):
            raise DomainError(f"vertex {x!r} is not in the universe of {self.name}")

    def neighbors(self, x) -> list[tuple[Vertex, float]]:
        """Neighbors of ``x`` with positive weight, as a list of ``(y, b)``."""
        out = []
        for k, (y, w) in enumerate(self._neighbors(x)):
            if k >= self.max_degree:
                raise UnsupportedPresentationError(
                    f"vertex {x!r} has more than {self.max_degree} neighbors; "
                    "only locally finite presentations are supported"
                )
            w = float(w)
            if w != 0.0:
                out.append((y, w))
        return out

    def b(self, x, y) -> float:
        total = 0.0
        for z, w in self.neighbors(x):
            if z == y:
                total += w
        return total

    def q(self, x) -> float:
        return float(self._potential(x))

    def m(self, x) -> float:
        return float(self._measure(x))

    # -- derived models ------------------------------------------------
    def _derive(self, **changes):
        kw = dict(
            neighbors=self._neighbors,
            contains=self._contains,
            potential=self._potential,
            measure=self._measure,
            vertices=self.vertices,
            name=self.name,
            spec=None,
            max_degree=self.max_degree,
        )
        kw.update(changes)
        out = GraphModel(**kw)
        out.kind = self.kind
        out.potential_is_zero = self.potential_is_zero and "potential" not in changes
        for attr in ("lattice_dim", "lattice_weight"):
            if hasattr(self, attr):
                setattr(out, attr, getattr(self, attr))
        return out

    def with_potential(self, q: Callable[[Vertex], float] | float, name=None) -> "GraphModel":
        """Copy of the model with the potential replaced by ``q``."""
        if not callable(q):
            c = float(q)
            q = lambda x: c  # noqa: E731
        return self._derive(potential=q, name=name or self.name + "+q")

    def add_potential(self, dq: Callable[[Vertex], float], name=None) -> "GraphModel":
        """Copy of the model with ``dq`` added to the current potential."""
        base = self._potential
        return self._derive(potential=lambda x: base(x) + dq(x), name=name or self.name + "+dq")

    def with_measure(self, m: Callable[[Vertex], float] | float, name=None) -> "GraphModel":
        if not callable(m):
            c = float(m)
            m = lambda x: c  # noqa: E731
        return self._derive(measure=m, name=name or self.name)

    def __repr__(self):
        return f"GraphModel({self.name!r})"


# ---------------------------------------------------------------------------
# constructors


def from_weights(weights: dict, q=None, m=None, vertices=None, name="explicit") -> GraphModel:
    """Finite graph from a directed weight mapping ``{(x, y): b(x, y)}``.

    Nothing is symmetrized; use :func:`validate` to detect defects.
    """
    adj: dict = {}
    verts = set(vertices or ())
    for (x, y), w in weights.items():
        adj.setdefault(x, []).append((y, float(w)))
        verts.update((x, y))
    q = dict(q or {})
    m = dict(m or {})
    model = GraphModel(
        neighbors=lambda x: adj.get(x, ()),
        potential=lambda x: q.get(x, 0.0),
        measure=lambda x: m.get(x, 1.0),
        vertices=verts,
        name=name,
    )
    model.potential_is_zero = not any(q.values())
    return model


def from_edges(vertices, edges, q=None, m=None, name="explicit") -> GraphModel:
    """Finite graph from an undirected edge list ``[(u, v, b), ...]``.

    Each edge sets ``b(u, v)`` and, unless the reverse pair is listed on its
    own, ``b(v, u)``.  Repeated pairs in the same direction add up.
    """
    vertices = [normalize_vertex(v) for v in vertices]
    directed: dict = {}
    listed = set()
    for u, v, w in edges:
        u, v = normalize_vertex(u), normalize_vertex(v)
        listed.add((u, v))
        directed[(u, v)] = directed.get((u, v), 0.0) + float(w)
    for u, v, w in edges:
        u, v = normalize_vertex(u), normalize_vertex(v)
        if (v, u) not in listed and u != v:
            directed[(v, u)] = directed.get((v, u), 0.0) + float(w)
    qd = {normalize_vertex(k): float(val) for k, val in (q or {}).items()}
    md = {normalize_vertex(k): float(val) for k, val in (m or {}).items()}
    model = from_weights(directed, qd, md, vertices=vertices, name=name)
    model.spec = {
        "vertices": list(vertices),
        "edges": [list(e) for e in edges],
        "q": {vertex_label(k): v for k, v in qd.items()},
        "m": {vertex_label(k): v for k, v in md.items()},
    }
    return model


def _const_or_map(value, default):
    """Turn a constant, dict, or callable into a per-vertex callable."""
    if value is None:
        return lambda x: default
    if callable(value):
        return value
    if isinstance(value, dict):
        table = {k: float(v) for k, v in value.items()}
        return lambda x: table.get(x, default)
    c = float(value)
    return lambda x: c


def lattice(d: int = 1, weight: float = 1.0, q=None, m=None) -> GraphModel:
    """The lattice Z^d with constant edge weight.

    Vertices are ints for ``d == 1`` and ``d``-tuples otherwise.
    """
    if d < 1:
        raise DomainError("lattice dimension must be >= 1")
    w = float(weight)
    zero_q = q is None
    if d == 1:

        def nbrs(x):
            return ((x - 1, w), (x + 1, w))

        def contains(x):
            return isinstance(x, (int, np.integer)) and not isinstance(x, bool)

    else:

        def nbrs(x):
            out = []
            for i in range(d):
                for s in (-1, 1):
                    y = list(x)
                    y[i] += s
                    out.append((tuple(y), w))
            return out

        def contains(x):
            return isinstance(x, tuple) and len(x) == d and all(isinstance(c, (int, np.integer)) for c in x)

    model = GraphModel(
        nbrs,
        contains,
        potential=_const_or_map(q, 0.0),
        measure=_const_or_map(m, 1.0),
        name=f"Z^{d}",
        spec={"generator": "lattice", "params": {"d": d, "weight": w}},
    )
    model.lattice_dim = d
    model.lattice_weight = w
    model.potential_is_zero = zero_q
    return model


def tree(k: int = 2, weight: float = 1.0, q=None, m=None) -> GraphModel:
    """Rooted k-ary tree; vertices are child-index tuples, the root is ``()``."""
    if k < 1:
        raise DomainError("tree arity must be >= 1")
    w = float(weight)

    def nbrs(x):
        out = [(x + (i,), w) for i in range(k)]
        if x:
            out.append((x[:-1], w))
        return out

    def contains(x):
        return isinstance(x, tuple) and all(isinstance(c, (int, np.integer)) and 0 <= c < k for c in x)

    model = GraphModel(
        nbrs,
        contains,
        potential=_const_or_map(q, 0.0),
        measure=_const_or_map(m, 1.0),
        name=f"{k}-ary tree",
        spec={"generator": "tree", "params": {"k": k, "weight": w}},
    )
    model.potential_is_zero = q is None
    return model


def halfline(weight: float = 1.0, q=None, m=None) -> GraphModel:
    """The half-line N_0 = {0, 1, 2, ...} with b(n, n+1) = weight."""
    w = float(weight)

    def nbrs(x):
        return ((x + 1, w),) if x == 0 else ((x - 1, w), (x + 1, w))

    model = GraphModel(
        nbrs,
        lambda x: isinstance(x, (int, np.integer)) and not isinstance(x, bool) and x >= 0,
        potential=_const_or_map(q, 0.0),
        measure=_const_or_map(m, 1.0),
        name="N0",
        spec={"generator": "halfline", "params": {"weight": w}},
    )
    model.potential_is_zero = q is None
    return model


def halfline_dirichlet(weight: float = 1.0, q=None, m=None) -> GraphModel:
    """Half-line N = {1, 2, ...} killed at 0.

    The removed edge to 0 is encoded as ``q(1) += b(1, 0)``.
    """
    w = float(weight)
    base_q = _const_or_map(q, 0.0)

    def nbrs(x):
        return ((x + 1, w),) if x == 1 else ((x - 1, w), (x + 1, w))

    return GraphModel(
        nbrs,
        lambda x: isinstance(x, (int, np.integer)) and not isinstance(x, bool) and x >= 1,
        potential=lambda x: base_q(x) + (w if x == 1 else 0.0),
        measure=_const_or_map(m, 1.0),
        name="N (Dirichlet)",
        spec={"generator": "halfline_dirichlet", "params": {"weight": w}},
    )


# ---------------------------------------------------------------------------
# finite regions


@dataclass(frozen=True, eq=False)
class FiniteRegion:
    """A finite vertex set K with its induced edges and boundary ``∂K``.

    ``edges`` holds each induced unordered pair once as ``(i, j, b)`` with
    ``i < j``; ``boundary`` holds ``(i, y, b)`` for ``i`` in K and ``y``
    outside.  ``degree`` is the full weighted degree including boundary
    edges.
    """

    model: GraphModel
    level: int
    vertices: tuple
    index: dict
    edges_i: np.ndarray
    edges_j: np.ndarray
    edges_b: np.ndarray
    boundary: tuple
    degree: np.ndarray
    q: np.ndarray
    m: np.ndarray
    interior: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.vertices)

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, x):
        return x in self.index

    def idx(self, x) -> int:
        try:
            return self.index[x]
        except (KeyError, TypeError):
            raise DomainError(f"vertex {x!r} is not in the region (level {self.level})") from None

    @property
    def boundary_i(self) -> np.ndarray:
        return np.array([e[0] for e in self.boundary], dtype=np.intp)

    @property
    def boundary_b(self) -> np.ndarray:
        return np.array([e[2] for e in self.boundary], dtype=float)

    def interior_vertices(self) -> list:
        return [v for v, inn in zip(self.vertices, self.interior) if inn]

    def indicator(self, x) -> np.ndarray:
        e = np.zeros(self.size)
        e[self.idx(x)] = 1.0
        return e

    def evaluate(self, func) -> np.ndarray:
        """Sample a per-vertex callable on the region."""
        return np.array([float(func(v)) for v in self.vertices])

    def subregion(self, keep: Iterable, level=None) -> "FiniteRegion":
        """Region materialized on a subset of this region's vertices."""
        return materialize(self.model, keep, self.level if level is None else level)


def _rel_close(a, b):
    return abs(a - b) <= 1e-14 * max(abs(a), abs(b), 1.0)


def materialize(model: GraphModel, vertices: Iterable, level: int = 0) -> FiniteRegion:
    """Build a :class:`FiniteRegion` on the given vertex set.

    Asserts ``b(x, x) = 0`` and ``b(x, y) = b(y, x)`` on every edge touching
    the set; violations raise :class:`DomainError`.
    """
    verts = sorted(set(vertices), key=sort_key)
    if not verts:
        raise DomainError("a region needs at least one vertex")
    for v in verts:
        model.check(v)
    index = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    degree = np.zeros(n)
    interior = np.ones(n, dtype=bool)
    seen: dict = {}
    ei, ej, eb = [], [], []
    boundary = []
    for i, x in enumerate(verts):
        for y, w in model.neighbors(x):
            if y == x:
                raise DomainError(f"nonzero diagonal weight b({x!r},{x!r}) = {w}")
            degree[i] += w
            j = index.get(y)
            if j is None:
                interior[i] = False
                back = model.b(y, x)
                if not _rel_close(back, w):
                    raise DomainError(f"asymmetric weight: b({x!r},{y!r})={w} but b({y!r},{x!r})={back}")
                boundary.append((i, y, w))
            else:
                seen[(i, j)] = seen.get((i, j), 0.0) + w
    for (i, j), w in seen.items():
        back = seen.get((j, i), 0.0)
        if not _rel_close(back, w):
            x, y = verts[i], verts[j]
            raise DomainError(f"asymmetric weight: b({x!r},{y!r})={w} but b({y!r},{x!r})={back}")
        if i < j:
            ei.append(i)
            ej.append(j)
            eb.append(w)
    q = np.array([model.q(v) for v in verts])
    m = np.array([model.m(v) for v in verts])
    if np.any(~(m > 0)):
        raise DomainError("measure must be strictly positive on the region")
    return FiniteRegion(
        model=model,
        level=level,
        vertices=tuple(verts),
        index=index,
        edges_i=np.array(ei, dtype=np.intp),
        edges_j=np.array(ej, dtype=np.intp),
        edges_b=np.array(eb, dtype=float),
        boundary=tuple(boundary),
        degree=degree,
        q=q,
        m=m,
        interior=interior,
    )


def graph_ball(model: GraphModel, center, radius: int) -> set:
    """Vertices within combinatorial distance ``radius`` of ``center``."""
    model.check(center)
    dist = {center: 0}
    queue = deque([center])
    while queue:
        x = queue.popleft()
        if dist[x] == radius:
            continue
        for y, _ in model.neighbors(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return set(dist)


def linf_ball(center, radius: int) -> set:
    """ℓ^∞ ball in Z^d around an int or tuple ``center``."""
    if isinstance(center, tuple):
        ranges = [range(c - radius, c + radius + 1) for c in center]
        return set(itertools.product(*ranges))
    return set(range(center - radius, center + radius + 1))


class ExhaustionFamily:
    """Nested finite regions ``K_0 ⊆ K_1 ⊆ ...`` all containing an anchor.

    Parameters
    ----------
    model : GraphModel
    anchor : vertex
        Vertex ``o`` contained in every region.
    ball : {"graph", "l1", "linf"}
        Region shape.  ``"graph"`` (alias ``"l1"`` on lattices) is the
        combinatorial ball of radius ``n``; ``"linf"`` is the lattice box.
    region_fn : callable, optional
        Custom ``level -> iterable of vertices``; overrides ``ball``.
    """

    def __init__(self, model: GraphModel, anchor, ball: str = "graph", region_fn=None):
        model.check(anchor)
        if ball not in ("graph", "l1", "linf"):
            raise DomainError(f"unknown ball type {ball!r}")
        if ball == "linf" and not hasattr(model, "lattice_dim"):
            raise DomainError("linf balls are only defined on lattice models")
        self.model = model
        self.anchor = anchor
        self.ball = ball
        self.region_fn = region_fn
        self._cache: dict = {}

    def vertex_set(self, n: int) -> set:
        if n < 0:
            raise DomainError("exhaustion level must be >= 0")
        if self.region_fn is not None:
            verts = set(self.region_fn(n))
            if self.anchor not in verts:
                raise DomainError(f"anchor {self.anchor!r} missing from level {n}")
            return verts
        if self.ball == "linf":
            return linf_ball(self.anchor, n)
        return graph_ball(self.model, self.anchor, n)

    def region(self, n: int) -> FiniteRegion:
        if n not in self._cache:
            self._cache[n] = materialize(self.model, self.vertex_set(n), level=n)
        return self._cache[n]

    def anchored_at(self, x) -> "ExhaustionFamily":
        """Same region shape centred at ``x`` (custom region functions keep theirs)."""
        if self.region_fn is not None:
            return self
        return ExhaustionFamily(self.model, x, ball=self.ball)

    def with_model(self, model: GraphModel) -> "ExhaustionFamily":
        return ExhaustionFamily(model, self.anchor, ball=self.ball, region_fn=self.region_fn)

    def __repr__(self):
        return f"ExhaustionFamily({self.model.name!r}, anchor={self.anchor!r}, ball={self.ball!r})"


def default_family(model: GraphModel, anchor=None, ball: str = "graph") -> ExhaustionFamily:
    """Standard exhaustion for a model.

    The Dirichlet half-line uses ``K_N = {1, ..., N}`` (level 0 is ``{1}``);
    other generators use balls around the anchor, whose default is the
    origin, the root, or the first listed vertex.
    """
    gen = model.kind
    if gen == "halfline_dirichlet":
        return ExhaustionFamily(model, 1 if anchor is None else anchor, region_fn=lambda n: range(1, max(n, 1) + 1))
    if anchor is None:
        if gen == "lattice":
            d = model.lattice_dim
            anchor = 0 if d == 1 else (0,) * d
        elif gen == "tree":
            anchor = ()
        elif gen == "halfline":
            anchor = 0
        elif model.vertices:
            anchor = model.vertices[0]
        else:
            raise DomainError("an anchor vertex is required for this model")
    return ExhaustionFamily(model, anchor, ball=ball)


def region(family: ExhaustionFamily, n: int) -> FiniteRegion:
    """Level-``n`` member of the exhaustion."""
    return family.region(n)


def weighted_degree(model: GraphModel, x) -> float:
    """Weighted degree ``B(x) = Σ_y b(x, y)``."""
    model.check(x)
    return math.fsum(w for _, w in model.neighbors(x))


@dataclass
class ValidationReport:
    symmetry_violations: list = field(default_factory=list)
    diagonal_violations: list = field(default_factory=list)
    measure_violations: list = field(default_factory=list)
    unknown_vertices: list = field(default_factory=list)
    connected: bool = True
    components: int = 1

    @property
    def ok(self) -> bool:
        return not (
            self.symmetry_violations
            or self.diagonal_violations
            or self.measure_violations
            or self.unknown_vertices
        )

    def summary(self) -> str:
        status = "pass" if self.ok else "fail"
        conn = "connected" if self.connected else "not connected"
        return f"{status}, {conn}"


def validate(model: GraphModel, probe_set: Iterable) -> ValidationReport:
    """Check the standing assumptions on the probed vertices.

    Every defect is collected in the report; nothing is raised except for an
    empty probe set.
    """
    probes = list(dict.fromkeys(probe_set))
    if not probes:
        raise DomainError("probe_set must be nonempty")
    report = ValidationReport()
    flagged: set = set()
    known = []
    for x in probes:
        if not model.contains(x):
            report.unknown_vertices.append(x)
            continue
        known.append(x)
        try:
            mx = model.m(x)
        except Exception as exc:  # noqa: BLE001
            report.measure_violations.append((x, repr(exc)))
        else:
            if not mx > 0:
                report.measure_violations.append((x, mx))
        for y, w in model.neighbors(x):
            if y == x:
                report.diagonal_violations.append((x, w))
                continue
            back = model.b(y, x) if model.contains(y) else 0.0
            pair = frozenset((x, y))
            if not _rel_close(back, w) and pair not in flagged:
                flagged.add(pair)
                report.symmetry_violations.append((x, y, w, back))
    # connectivity among probes only
    probe_set_ = set(known)
    comps = 0
    unseen = set(known)
    while unseen:
        comps += 1
        start = unseen.pop()
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y, _ in model.neighbors(x):
                if y in probe_set_ and y in unseen:
                    unseen.discard(y)
                    queue.append(y)
    report.components = comps
    report.connected = comps <= 1
    return report
