"""The formal operator H = L + q, the form h, and ground state transforms.

Everything here works vertex by vertex through the model's neighbor
enumerator and never touches an assembled matrix, so it serves as an
independent check on :mod:`sgl.solver`.  Functions on a region are zero
outside it.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Callable

import numpy as np

from .errors import DomainError, PreconditionError
from .graph import FiniteRegion, GraphModel, materialize

DEFAULT_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class RegionFunction:
    """Real values on the vertices of a region, zero elsewhere."""

    region: FiniteRegion
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.region.size,):
            raise DomainError(f"expected {self.region.size} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("region function values must be finite")
        object.__setattr__(self, "values", vals)

    def __call__(self, x) -> float:
        i = self.region.index.get(x)
        return 0.0 if i is None else float(self.values[i])

    def __getitem__(self, x) -> float:
        return self(x)

    def __len__(self):
        return len(self.values)

    @classmethod
    def from_callable(cls, region: FiniteRegion, func) -> "RegionFunction":
        return cls(region, region.evaluate(func))

    @classmethod
    def indicator(cls, region: FiniteRegion, x) -> "RegionFunction":
        return cls(region, region.indicator(x))

    def on(self, region: FiniteRegion) -> "RegionFunction":
        """Restriction/extension by zero to another region."""
        if region is self.region:
            return self
        return RegionFunction(region, np.array([self(v) for v in region.vertices]))

    def support(self) -> list:
        return [v for v, val in zip(self.region.vertices, self.values) if val != 0.0]

    def as_dict(self) -> dict:
        return dict(zip(self.region.vertices, self.values.tolist()))

    def __add__(self, other):
        other = other.on(self.region)
        return RegionFunction(self.region, self.values + other.values)

    def __mul__(self, c):
        return RegionFunction(self.region, self.values * float(c))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return RegionFunction(self.region, self.values / float(c))


def _evaluator(u) -> Callable:
    if isinstance(u, RegionFunction):
        return u
    if callable(u):
        return u
    raise DomainError("expected a RegionFunction or a callable on vertices")


def apply_H(model: GraphModel, u, x) -> float:
    """``(Hu)(x) = Σ_y b(x, y)(u(x) - u(y)) + q(x) u(x)``.

    ``u`` is a :class:`RegionFunction` (zero off its region) or any callable
    on vertices.
    """
    model.check(x)
    f = _evaluator(u)
    ux = f(x)
    terms = []
    for y, w in model.neighbors(x):
        if not model.contains(y):
            raise DomainError(f"neighbor {y!r} of {x!r} is outside the enumerable universe")
        terms.append(w * (ux - f(y)))
    terms.append(model.q(x) * ux)
    return math.fsum(terms)


def apply_H_on(model: GraphModel, u, vertices) -> np.ndarray:
    """Vector of ``(Hu)(x)`` over an iterable of vertices."""
    return np.array([apply_H(model, u, x) for x in vertices])


def _common_region(model, phi: RegionFunction, psi: RegionFunction):
    ra, rb = phi.region, psi.region
    if ra is rb:
        return phi, psi
    if all(v in ra.index for v in rb.vertices):
        return phi, psi.on(ra)
    if all(v in rb.index for v in ra.vertices):
        return phi.on(rb), psi
    joint = materialize(model, set(ra.vertices) | set(rb.vertices), level=max(ra.level, rb.level))
    return phi.on(joint), psi.on(joint)


def quad_form(model: GraphModel, phi: RegionFunction, psi: RegionFunction | None = None) -> float:
    """Bilinear form ``h(φ, ψ)``; ``h(φ)`` when ``psi`` is omitted.

    Each induced edge is visited once; boundary edges see the outside value
    0, which gives the ``b(x, y) φ(x) ψ(x)`` terms of the restriction of h
    to functions supported in the region.
    """
    if psi is None:
        psi = phi
    phi, psi = _common_region(model, phi, psi)
    reg = phi.region
    a, c = phi.values, psi.values
    i, j, b = reg.edges_i, reg.edges_j, reg.edges_b
    terms = [float(np.dot(b, (a[i] - a[j]) * (c[i] - c[j])))]
    if reg.boundary:
        bi, bb = reg.boundary_i, reg.boundary_b
        terms.append(float(np.dot(bb, a[bi] * c[bi])))
    terms.append(float(np.dot(reg.q, a * c)))
    return math.fsum(terms)


def _positive_sample(v, x) -> float:
    val = float(v(x))
    if not val > 0:
        raise DomainError(f"ground state v must be positive, got v({x!r}) = {val}")
    return val


def gst_form(model: GraphModel, v, phi: RegionFunction, psi: RegionFunction | None = None) -> float:
    """Ground state transformed form ``h_v(φ, ψ) = ½ Σ b v(x) v(y) (φ(x)-φ(y))(ψ(x)-ψ(y))``.

    ``v`` is sampled on every edge touching the region.
    """
    if psi is None:
        psi = phi
    phi, psi = _common_region(model, phi, psi)
    reg = phi.region
    v = _evaluator(v)
    vv = np.array([_positive_sample(v, x) for x in reg.vertices])
    a, c = phi.values, psi.values
    i, j, b = reg.edges_i, reg.edges_j, reg.edges_b
    terms = [float(np.dot(b * vv[i] * vv[j], (a[i] - a[j]) * (c[i] - c[j])))]
    for k, y, w in reg.boundary:
        if a[k] != 0.0 or c[k] != 0.0:
            terms.append(w * vv[k] * _positive_sample(v, y) * a[k] * c[k])
    return math.fsum(terms)


def gst_identity_residual(model: GraphModel, v, f, phi: RegionFunction, rtol: float = DEFAULT_RTOL) -> float:
    """``|h(φ) - h_v(φ/v) - Σ f φ²|`` for data with ``Hv = f v`` on supp φ.

    The precondition is checked with :func:`apply_H`; a mismatch larger than
    ``rtol`` (relative) raises :class:`PreconditionError` listing the bad
    vertices.
    """
    v = _evaluator(v)
    f = _evaluator(f)
    reg = phi.region
    bad = {}
    for x in phi.support():
        hv = apply_H(model, v, x)
        fv = f(x) * v(x)
        scale = max(abs(hv), abs(fv), abs(v(x)) * (abs(model.q(x)) + sum(w for _, w in model.neighbors(x))), 1e-300)
        if abs(hv - fv) > rtol * scale:
            bad[x] = (hv, fv)
    if bad:
        raise PreconditionError(f"Hv != f v at {len(bad)} support vertices", details=bad)
    vv = reg.evaluate(v)
    if np.any(~(vv > 0)):
        raise DomainError("ground state v must be positive on the region")
    transformed = RegionFunction(reg, phi.values / vv)
    potential = math.fsum(f(x) * val * val for x, val in zip(reg.vertices, phi.values))
    return abs(quad_form(model, phi) - gst_form(model, v, transformed) - potential)


@dataclass(frozen=True)
class ExtendedFormValue:
    """Partial sum of the extended form on one region.

    ``interior`` sums over induced edges, ``boundary`` over ``∂K`` with the
    outside value of ``g`` taken as 0.  ``truncated`` is always True: a
    finite region never certifies the value of the full series.
    """

    interior: float
    boundary: float
    truncated: bool = True

    @property
    def total(self) -> float:
        return self.interior + self.boundary


def extended_form(model: GraphModel, v, g: RegionFunction) -> ExtendedFormValue:
    """Partial sums of ``½ Σ b v(x) v(y) (g(x)/v(x) - g(y)/v(y))²`` on ``g``'s region."""
    v = _evaluator(v)
    reg = g.region
    vv = np.array([_positive_sample(v, x) for x in reg.vertices])
    r = g.values / vv
    i, j, b = reg.edges_i, reg.edges_j, reg.edges_b
    interior = float(np.dot(b * vv[i] * vv[j], (r[i] - r[j]) ** 2))
    bterms = [w * vv[k] * _positive_sample(v, y) * r[k] ** 2 for k, y, w in reg.boundary if r[k] != 0.0]
    return ExtendedFormValue(interior=interior, boundary=math.fsum(bterms))
