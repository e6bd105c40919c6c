"""Bottom of the spectrum, positive supersolution witnesses and Harnack constants."""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .criticality import EvidenceSeries, _levels, map_levels
from .errors import DomainError, HarnackSizeError
from .forms import RegionFunction, apply_H
from .graph import ExhaustionFamily, GraphModel, materialize
from .solver import DirichletSystem, assemble, lambda_min, resolvent_apply

INFINITE_GRAPH_NOTE = (
    "Truncation values bound the infinite-graph quantity from above and decrease "
    "toward it; equality in the limit is not certified."
)


def _measure_of(family, m):
    return family.model.m if m is None else m


def richardson(levels, values) -> float | None:
    """Extrapolant ``v_N + (v_N - v_{N/2})/(2^p - 1)`` assuming ``v ≈ v_∞ + a n^-p``.

    Uses the same three-level fit as the criticality classifier; ``None``
    when the tail does not support a finite limit.
    """
    from .criticality import tail_fit

    fit = tail_fit(levels, values)
    if fit is None or not math.isfinite(fit[1]):
        return None
    return fit[1]


def lambda0_series(family: ExhaustionFamily, m=None, N: int = 10, levels=None) -> EvidenceSeries:
    """``λ_min`` of the Dirichlet truncations with measure ``m``; nonincreasing."""
    lv = _levels(N, levels, start=0)
    mm = _measure_of(family, m)
    vals = map_levels(lambda n: lambda_min(assemble(family, n, measure=mm)).value, lv)
    s = EvidenceSeries("lambda0_n", lv, vals, "decreasing")
    s.meta["extrapolant"] = richardson(lv, vals)
    s.meta["note"] = INFINITE_GRAPH_NOTE
    return s


def _complement_system(family, hole_vertices, n, measure):
    keep = family.vertex_set(n) - set(hole_vertices)
    if not keep:
        return None
    return DirichletSystem(materialize(family.model, keep, level=n), measure=measure)


@dataclass
class EssentialProbe:
    """Bottom of the spectrum outside finite holes ``K = K_k``."""

    hole_levels: list
    series: dict
    estimate: float
    note: str = INFINITE_GRAPH_NOTE

    def to_dict(self) -> dict:
        return {
            "hole_levels": self.hole_levels,
            "series": {str(k): s.to_dict() for k, s in self.series.items()},
            "estimate": self.estimate,
            "note": self.note,
        }


def lambda0_ess_probe(family: ExhaustionFamily, m=None, hole_levels=(0,), N: int = 10, levels=None) -> EssentialProbe:
    """λ₀ of the form restricted to ``X \\ K_k`` for each hole level ``k``.

    Each series uses the regions ``K_n \\ K_k`` (Dirichlet condition on the
    hole) for ``k < n <= N``.  The estimate of ``λ₀^ess`` is the largest
    final value over the holes.
    """
    mm = _measure_of(family, m)
    out = {}
    for k in hole_levels:
        if k >= N:
            raise DomainError(f"hole level {k} must be below N = {N}")
        hole = family.vertex_set(k)
        lv = [n for n in _levels(N, levels) if n > k]
        vals = map_levels(lambda n: lambda_min(_complement_system(family, hole, n, mm)).value, lv)
        out[k] = EvidenceSeries(f"lambda0_ess_n(hole={k})", lv, vals, "decreasing")
    estimate = max(s.last for s in out.values())
    return EssentialProbe(list(hole_levels), out, estimate)


@dataclass
class WitnessReport:
    positive: bool
    supersolution: bool
    min_value: float
    min_defect: float
    checked: int
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.positive and self.supersolution


def ap_witness(family: ExhaustionFamily, m, lam: float, x, N: int, tol: float = 1e-8):
    """Positive supersolution ``u = (H_K - λ m)^{-1} 1_x`` on ``K_N``.

    Verifies ``u > 0`` on ``K_N`` and ``(H - λ m) u >= 0`` at every interior
    vertex, evaluated independently through :func:`sgl.forms.apply_H`.
    Returns ``(u, report)``.
    """
    mm = _measure_of(family, m)
    system = assemble(family, N, measure=mm)
    reg = system.region
    delta = reg.indicator(x) / system.measure
    u = resolvent_apply(system, lam, delta)
    interior = reg.interior_vertices()
    mvals = {v: mv for v, mv in zip(reg.vertices, system.measure)}
    defects = [apply_H(family.model, u, y) - lam * mvals[y] * u(y) for y in interior]
    scale = max(1.0, float(np.max(np.abs(u.values))))
    min_defect = min(defects) if defects else 0.0
    report = WitnessReport(
        positive=bool(np.all(u.values > 0)),
        supersolution=min_defect >= -tol * scale,
        min_value=float(u.values.min()),
        min_defect=float(min_defect),
        checked=len(interior),
    )
    return u, report


# ---------------------------------------------------------------------------
# Harnack


class HarnackInstance:
    """Connected finite set ``W`` with a comparison function ``f``.

    ``d(x) = Σ_y b(x, y) + q(x) - f(x)`` sums over all neighbors, inside
    and outside ``W``.
    """

    def __init__(self, model: GraphModel, W, f=0.0):
        self.model = model
        self.W = list(dict.fromkeys(W))
        if not self.W:
            raise DomainError("W must be nonempty")
        for x in self.W:
            model.check(x)
        self.f = f if callable(f) else (lambda x, c=float(f): c)
        self.d = {x: math.fsum(w for _, w in model.neighbors(x)) + model.q(x) - float(self.f(x)) for x in self.W}
        wset = set(self.W)
        self.edges = {x: [(y, w) for y, w in model.neighbors(x) if y in wset] for x in self.W}
        if not self._connected():
            raise DomainError("W must be connected in the induced graph")

    def _connected(self) -> bool:
        seen = {self.W[0]}
        stack = [self.W[0]]
        while stack:
            x = stack.pop()
            for y, _ in self.edges[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(self.W)

    def with_f(self, f) -> "HarnackInstance":
        return HarnackInstance(self.model, self.W, f)


def harnack_constant(instance: HarnackInstance, cap: int = 16) -> float:
    """Path-product Harnack constant ``C(H, W, f)``.

    ``C`` is the maximum over ordered pairs ``(a, z)`` of the minimum over
    simple paths ``a = x_0 ~ ... ~ x_k = z`` in ``W`` of
    ``Π d(x_j) / b(x_j, x_{j+1})``.  Factors may be below 1, so all simple
    paths are enumerated.  Returns ``math.inf`` when some ``d(x) <= 0``
    (no finite constant certified).
    """
    W = instance.W
    if len(W) > cap:
        raise HarnackSizeError(f"|W| = {len(W)} exceeds the enumeration cap {cap}")
    if any(instance.d[x] <= 0 for x in W):
        return math.inf
    if len(W) == 1:
        return 1.0
    worst = 1.0
    for a in W:
        best = {a: 1.0}
        on_path = {a}

        def dfs(x, prod):
            for y, w in instance.edges[x]:
                if y in on_path:
                    continue
                p = prod * instance.d[x] / w
                if p < best.get(y, math.inf):
                    best[y] = p
                on_path.add(y)
                dfs(y, p)
                on_path.discard(y)

        dfs(a, 1.0)
        worst = max(worst, max(best[z] for z in W if z != a))
    return worst
