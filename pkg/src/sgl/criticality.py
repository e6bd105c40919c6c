"""Exhaustion limits: Green functions, capacities and criticality verdicts.

Every quantity is a monotone sequence indexed by exhaustion level.  The
classifiers read the tail of such a sequence and return a verdict together
with the evidence and the thresholds used.  Finite data never proves a
property of an infinite graph; reports say so.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
import json
import math
import os
from typing import Callable, Sequence

import numpy as np

from .errors import DefinitenessError, DomainError, FormNotNonnegativeError, NoMinimalGreenError
from .forms import RegionFunction, apply_H, quad_form
from .graph import ExhaustionFamily
from .solver import assemble, generalized_lambda_min, lambda_min, solve_green

CAVEAT = (
    "Evidence from finitely many exhaustion levels is necessary but not "
    "sufficient: no finite computation certifies a property of the infinite graph."
)
PROBE_CAVEAT = (
    "A finite sample of vertices cannot certify a bound on the supremum over "
    "all vertices; this probe is evidence only."
)

CRITICAL = "Critical"
SUBCRITICAL = "Subcritical"
INCONCLUSIVE = "Inconclusive"
POSITIVE_CRITICAL = "Positive-critical"
NULL_CRITICAL = "Null-critical"


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SGL_THREADS", "1")))
    except ValueError:
        return 1


def map_levels(func: Callable[[int], object], levels: Sequence[int]) -> list:
    """Evaluate ``func`` per level, in parallel up to ``SGL_THREADS`` workers.

    Results come back ordered by the input level list.
    """
    levels = list(levels)
    workers = min(_threads(), len(levels))
    if workers <= 1:
        return [func(n) for n in levels]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, levels))


def _levels(N: int, levels=None, start: int = 1) -> list[int]:
    if levels is not None:
        out = sorted(set(int(n) for n in levels))
    else:
        if N < start:
            raise DomainError(f"need N >= {start}")
        out = list(range(start, N + 1))
    if not out:
        raise DomainError("empty level list")
    return out


@dataclass
class EvidenceSeries:
    """Scalars indexed by exhaustion level with a declared monotonicity."""

    name: str
    levels: list
    values: np.ndarray
    expected_monotonicity: str = "none"
    slack: float = 1e-10
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.levels = [int(n) for n in self.levels]
        self.values = np.asarray(self.values, dtype=float)
        if self.expected_monotonicity not in ("increasing", "decreasing", "none"):
            raise DomainError(f"bad monotonicity {self.expected_monotonicity!r}")

    def __len__(self):
        return len(self.levels)

    def violations(self) -> list[int]:
        """Indices ``k`` where the declared monotonicity fails from ``k-1`` to ``k``."""
        v = self.values
        if len(v) < 2 or self.expected_monotonicity == "none":
            return []
        scale = np.maximum(np.abs(v[1:]), np.abs(v[:-1]))
        tol = self.slack * np.maximum(scale, 1.0)
        if self.expected_monotonicity == "increasing":
            bad = v[1:] < v[:-1] - tol
        else:
            bad = v[1:] > v[:-1] + tol
        return [int(k) + 1 for k in np.flatnonzero(bad)]

    def is_monotone(self) -> bool:
        return not self.violations()

    @property
    def last(self) -> float:
        return float(self.values[-1])

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "levels": list(self.levels),
            "values": [float(x) for x in self.values],
            "expected_monotonicity": self.expected_monotonicity,
        }


@dataclass
class DecisionRule:
    """Thresholds used to turn a monotone series into a verdict.

    plateau_eps
        Relative change across the last quarter of levels below which the
        series counts as having reached its limit.
    decay_factor
        Capacity must shrink at least this much from first to last level
        before a Critical verdict is possible.
    divergent_decay_factor
        Smaller shrink accepted when the tail fit finds no positive
        convergence rate (logarithmic divergence, as on ``Z^2``).
    min_rate
        Smallest fitted tail exponent ``p`` (series ≈ limit + a·(n+1)^-p)
        accepted as convergence to a finite limit.
    limit_fraction_sub, limit_fraction_crit
        Extrapolated capacity limit, as a fraction of the last value,
        above which the verdict is Subcritical / below which it is Critical.
    growth_floor
        Relative growth of a partial-sum series over its last half above
        which a non-converging fit counts as divergence.
    """

    plateau_eps: float = 1e-6
    decay_factor: float = 5.0
    divergent_decay_factor: float = 2.0
    min_rate: float = 0.25
    limit_fraction_sub: float = 0.5
    limit_fraction_crit: float = 0.1
    growth_floor: float = 1e-3

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ClassificationReport:
    verdict: str
    evidence: list
    parameters: dict
    caveat: str = CAVEAT
    details: dict = field(default_factory=dict)

    def series(self, name: str) -> EvidenceSeries:
        for s in self.evidence:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "evidence": [
                {"name": s.name, "levels": list(s.levels), "values": [float(x) for x in s.values]}
                for s in self.evidence
            ],
            "parameters": _jsonable(self.parameters),
            "caveat": self.caveat,
            "details": _jsonable(self.details),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


# ---------------------------------------------------------------------------
# tail analysis


def _nearest(levels, target):
    return int(np.argmin([abs(n - target) for n in levels]))


def tail_fit(levels, values):
    """Fit ``values ≈ limit + a·(n+1)^(-p)`` through three tail levels.

    The levels nearest ``N/4``, ``N/2`` and ``N`` are used.  Returns
    ``(p, limit)``; ``p = 0`` with ``limit = ±inf`` signals a tail that does
    not converge at any positive rate, ``None`` means too few levels.
    """
    levels = list(levels)
    values = np.asarray(values, dtype=float)
    N = levels[-1]
    i3 = len(levels) - 1
    i2 = _nearest(levels, N / 2)
    i1 = _nearest(levels, N / 4)
    if not i1 < i2 < i3:
        return None
    x1, x2, x3 = (levels[i] + 1.0 for i in (i1, i2, i3))
    v1, v2, v3 = values[i1], values[i2], values[i3]
    d1, d2 = v1 - v2, v2 - v3
    if d2 == 0.0 or d1 == 0.0 or np.sign(d1) != np.sign(d2):
        return (math.inf, float(v3))
    ratio = d1 / d2

    def shape(p):
        return (x1**-p - x2**-p) / (x2**-p - x3**-p)

    lo_ratio = math.log(x2 / x1) / math.log(x3 / x2)
    if ratio <= lo_ratio:
        return (0.0, -math.inf * np.sign(d2))
    lo, hi = 1e-9, 60.0
    if ratio >= shape(hi):
        return (hi, float(v3))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if shape(mid) < ratio:
            lo = mid
        else:
            hi = mid
    p = 0.5 * (lo + hi)
    limit = v3 - d2 * x3**-p / (x2**-p - x3**-p)
    return (p, float(limit))


def _last_quarter_change(levels, values):
    N = levels[-1]
    k = next(i for i, n in enumerate(levels) if n >= levels[0] + 0.75 * (N - levels[0]))
    k = min(k, len(levels) - 2) if len(levels) > 1 else 0
    ref = values[-1]
    return abs(values[k] - values[-1]) / max(abs(ref), 1e-300)


# ---------------------------------------------------------------------------
# series


def _green_at(family, x, n):
    try:
        return solve_green(assemble(family, n), x)
    except DefinitenessError as exc:
        raise FormNotNonnegativeError(f"h is not positive on C_c(K_{n}): {exc}") from exc


def green_series(family: ExhaustionFamily, x, y, N: int, levels=None) -> EvidenceSeries:
    """``G_n(x, y)`` along the exhaustion; increasing in ``n``."""
    lv = _levels(N, levels)
    vals = map_levels(lambda n: _green_at(family, x, n)(y), lv)
    return EvidenceSeries(f"G_n({x},{y})", lv, vals, "increasing")


def capacity_series(family: ExhaustionFamily, x, N: int, levels=None) -> EvidenceSeries:
    """``cap_n(x) = 1 / G_n(x, x)``; decreasing in ``n``."""
    g = green_series(family, x, x, N, levels)
    return EvidenceSeries(f"cap_n({x})", g.levels, 1.0 / g.values, "decreasing")


def classify(family: ExhaustionFamily, x, N: int, rule: DecisionRule | None = None, levels=None) -> ClassificationReport:
    """Critical / Subcritical / Inconclusive from the capacity of ``{x}``.

    Positivity of every Green solve certifies ``h >= 0`` on each truncation;
    if it fails, :class:`FormNotNonnegativeError` is raised.
    """
    rule = rule or DecisionRule()
    g = green_series(family, x, x, N, levels)
    cap = EvidenceSeries(f"cap_n({x})", g.levels, 1.0 / g.values, "decreasing")
    lv, cv = cap.levels, cap.values
    details = {"monotone": cap.is_monotone() and g.is_monotone()}
    verdict = INCONCLUSIVE
    if len(lv) >= 2:
        change = _last_quarter_change(lv, cv)
        shrink = cv[0] / cv[-1]
        # fit the Green diagonal: capacity differences shrink like ΔG/G², which
        # makes slowly diverging G look convergent
        fit = tail_fit(lv, g.values)
        details.update(last_quarter_change=change, shrink=shrink)
        if fit is not None:
            p, g_lim = fit
            cap_lim = 0.0 if g_lim == math.inf else 1.0 / g_lim
            details.update(tail_exponent=p, extrapolated_capacity=cap_lim)
        if change < rule.plateau_eps:
            verdict, reason = SUBCRITICAL, "plateau"
        elif fit is not None and shrink >= rule.decay_factor and cap_lim <= rule.limit_fraction_crit * cv[-1]:
            verdict, reason = CRITICAL, "capacity decays to zero"
        elif fit is not None and p == 0.0 and cap_lim == 0.0 and shrink >= rule.divergent_decay_factor:
            verdict, reason = CRITICAL, "Green diagonal diverges at no positive rate"
        elif fit is not None and p >= rule.min_rate and cap_lim >= rule.limit_fraction_sub * cv[-1]:
            verdict, reason = SUBCRITICAL, "extrapolated positive capacity"
        else:
            reason = "thresholds not met"
        details["reason"] = reason
    params = {"anchor": x, "levels": [lv[0], lv[-1]], "count": len(lv), "rule": rule.to_dict(), "certificate": "green-positivity"}
    return ClassificationReport(verdict, [cap, g], params, details=details)


@dataclass
class GroundStateResult:
    psi: RegionFunction
    label: str
    max_change: float
    window: list
    method: str = "eigen"


def _profile(family, o, n, method):
    if method == "green":
        g = _green_at(family, o, n)
    elif method == "eigen":
        g = lambda_min(assemble(family, n, measure=1.0)).vector
    else:
        raise DomainError(f"unknown ground state method {method!r}")
    if not g(o) > 0:
        raise DomainError(f"profile vanishes at the anchor {o!r}")
    return g / g(o)


def ground_state(
    family: ExhaustionFamily,
    o,
    N: int,
    window_radius: int = 10,
    report: ClassificationReport | None = None,
    method: str = "eigen",
) -> GroundStateResult:
    """Level-``N`` approximation of the ground state normalized at ``o``.

    ``method="eigen"`` uses the positive bottom Dirichlet eigenvector of
    ``K_N`` (counting measure); ``method="green"`` uses the capacity
    minimizer ``G_N(o, ·) / G_N(o, o)``.  Both are positive supersolutions
    on ``K_N`` that converge to the ground state in the critical case; the
    eigenvector's error on a fixed window is quadratic rather than linear
    in ``window / N``.

    The diagnostic is ``max |ψ_N - ψ_{N-1}|`` over the window (the level
    ``window_radius`` region).  The label is "ground state" only when a
    Critical report is supplied.
    """
    if N < 1:
        raise DomainError("need N >= 1")
    psi = _profile(family, o, N, method)
    prev = _profile(family, o, N - 1, method)
    window = sorted(family.vertex_set(min(window_radius, N - 1)), key=family.region(N).index.get)
    change = max(abs(psi(v) - prev(v)) for v in window)
    if report is not None and report.verdict == CRITICAL:
        label = "ground state"
    else:
        label = "normalized Green column" if method == "green" else "normalized Dirichlet eigenvector"
    return GroundStateResult(psi, label, float(change), window, method)


def null_sequence(family: ExhaustionFamily, o, N: int, levels=None) -> list[tuple[RegionFunction, float]]:
    """Capacity minimizers ``e_n`` with ``e_n(o) = 1`` and their energies ``h(e_n)``."""
    model = family.model

    def one(n):
        g = _green_at(family, o, n)
        e = g / g(o)
        return e, quad_form(model, e)

    return map_levels(one, _levels(N, levels))


@dataclass
class MinimalGreenResult:
    green: RegionFunction
    residual: float
    checked: int
    report: ClassificationReport


def minimal_green(family: ExhaustionFamily, x, N: int, report: ClassificationReport | None = None, tol: float = 1e-8) -> MinimalGreenResult:
    """Level-``N`` approximant of the minimal Green function ``G(x, ·)``.

    Runs :func:`classify` unless a report is passed; anything but a
    Subcritical verdict raises :class:`NoMinimalGreenError`.  The residual
    is ``max |H G_N(x, ·) - 1_x|`` over ``K_{N-1}``, evaluated vertex by
    vertex with :func:`sgl.forms.apply_H`.
    """
    if report is None:
        report = classify(family, x, N)
    if report.verdict != SUBCRITICAL:
        raise NoMinimalGreenError(f"verdict is {report.verdict}; no minimal Green function")
    g = _green_at(family, x, N)
    probe = family.region(max(N - 1, 0)).vertices
    res = max(abs(apply_H(family.model, g, y) - (1.0 if y == x else 0.0)) for y in probe)
    return MinimalGreenResult(g, float(res), len(probe), report)


def weight_nonneg_series(family: ExhaustionFamily, w, N: int, levels=None) -> EvidenceSeries:
    """``inf h/‖·‖_w²`` on ``C_c(K_n)``; a value below 1 disproves ``h - w >= 0``."""
    lv = _levels(N, levels)
    vals = map_levels(lambda n: generalized_lambda_min(assemble(family, n), w), lv)
    below = [n for n, v in zip(lv, vals) if v < 1.0]
    meta = {"first_violation": below[0] if below else None}
    return EvidenceSeries("gen_lambda_min", lv, vals, "decreasing", meta=meta)


def weight_criticality(family: ExhaustionFamily, w, psi, N: int, rule: DecisionRule | None = None, levels=None) -> ClassificationReport:
    """Positive- or null-criticality from partial sums ``S_n = Σ_{K_n} ψ² w``."""
    rule = rule or DecisionRule()
    lv = _levels(N, levels, start=0)

    def partial(n):
        reg = family.region(n)
        vals = [psi(v) ** 2 * w(v) for v in reg.vertices]
        return math.fsum(vals)

    sums = EvidenceSeries("S_n", lv, map_levels(partial, lv), "increasing")
    details = {}
    verdict = INCONCLUSIVE
    if len(lv) >= 2:
        sv = sums.values
        change = _last_quarter_change(lv, sv)
        fit = tail_fit(lv, sv)
        details["last_quarter_change"] = change
        if fit is not None:
            details.update(tail_exponent=fit[0], extrapolated_sum=fit[1])
        half = sv[_nearest(lv, lv[-1] / 2)]
        growth = (sv[-1] - half) / max(abs(sv[-1]), 1e-300)
        details["last_half_growth"] = growth
        if change < rule.plateau_eps:
            verdict, reason = POSITIVE_CRITICAL, "partial sums plateau"
        elif fit is not None and fit[0] >= rule.min_rate:
            verdict, reason = POSITIVE_CRITICAL, "convergent tail"
        elif fit is not None and fit[0] == 0.0 and growth >= rule.growth_floor:
            verdict, reason = NULL_CRITICAL, "sustained growth"
        else:
            reason = "thresholds not met"
        details["reason"] = reason
    params = {"levels": [lv[0], lv[-1]], "count": len(lv), "rule": rule.to_dict()}
    return ClassificationReport(verdict, [sums], params, details=details)


@dataclass
class UniformProbeReport:
    sample: list
    green_diagonal: list
    max_green: float
    capacity_floor: float
    relative_spread: float
    trend: str
    caveat: str = PROBE_CAVEAT

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def _distance_order(family, sample, limit: int = 1_000_000):
    """Exhaustion distance of each sample vertex from the anchor (sample order if unknown)."""
    model, o = family.model, family.anchor
    if family.region_fn is None and getattr(model, "lattice_dim", None):
        a = o if isinstance(o, tuple) else (o,)

        def dist(x):
            diff = [abs(c - d) for c, d in zip(x if isinstance(x, tuple) else (x,), a)]
            return max(diff) if family.ball == "linf" else sum(diff)

        return {x: dist(x) for x in sample}
    if family.region_fn is not None:
        order = {}
        for x in sample:
            n = 0
            while x not in family.vertex_set(n):
                n += 1
                if n > 10_000:
                    return {x: k for k, x in enumerate(sample)}
            order[x] = n
        return order
    # one breadth-first search from the anchor
    todo = set(sample)
    dist = {o: 0}
    queue = deque([o])
    while queue and todo and len(dist) < limit:
        x = queue.popleft()
        todo.discard(x)
        for y, _ in model.neighbors(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    if todo - set(dist):
        return {x: k for k, x in enumerate(sample)}
    return {x: dist[x] for x in sample}


def uniform_subcriticality_probe(
    family: ExhaustionFamily, sample, N: int, recenter: bool = True, spread_tol: float = 0.05
) -> UniformProbeReport:
    """Sample ``G_N(x, x)`` over vertices to probe ``sup_x G(x, x) < ∞``.

    With ``recenter`` the level-``N`` region is the ball of radius ``N``
    around each sample vertex.  The trend is "unbounded trend" when the
    relative spread exceeds ``spread_tol`` and the diagonal grows with
    distance from the anchor.
    """
    sample = list(sample)
    if not sample:
        raise DomainError("sample must be nonempty")

    def diag(x):
        fam = family.anchored_at(x) if recenter else family
        return _green_at(fam, x, N)(x)

    vals = np.array(map_levels(diag, sample))
    spread = float((vals.max() - vals.min()) / vals.max())
    order = _distance_order(family, sample)
    by_dist = [vals[k] for k in sorted(range(len(sample)), key=lambda k: order[sample[k]])]
    grows = all(b >= a - 1e-12 * abs(a) for a, b in zip(by_dist, by_dist[1:]))
    trend = "unbounded trend" if spread > spread_tol and grows else "bounded"
    return UniformProbeReport(sample, vals.tolist(), float(vals.max()), float(1.0 / vals.max()), spread, trend)
