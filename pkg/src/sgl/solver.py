"""Dirichlet restrictions H_K and the linear algebra done on them.

``H_K`` is the operator of the form h restricted to functions supported in
a finite region K.  Its diagonal keeps the full degree ``Σ_y b(x, y) + q(x)``
including edges that leave K; off-region neighbors contribute no coupling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import functools
import logging
import math

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from .errors import (
    ConvergenceError,
    DefinitenessError,
    DegenerateWeightError,
    DomainError,
    SpectralParameterError,
)
from .forms import RegionFunction
from .graph import ExhaustionFamily, FiniteRegion

logger = logging.getLogger(__name__)

DENSE_MAX = 500
DIRECT_MAX = 50_000
SOLVE_RTOL = 1e-12
EIG_TOL = 1e-9


class DirichletSystem:
    """Symmetric matrix of ``h`` restricted to ``C_c(K)`` plus a measure.

    Parameters
    ----------
    region : FiniteRegion
    measure : array_like, optional
        Per-vertex measure; defaults to the model's ``m`` on the region.
    """

    def __init__(self, region: FiniteRegion, measure=None):
        self.region = region
        n = region.size
        self.diag = region.degree + region.q
        i, j, b = region.edges_i, region.edges_j, region.edges_b
        rows = np.concatenate([np.arange(n), i, j])
        cols = np.concatenate([np.arange(n), j, i])
        vals = np.concatenate([self.diag, -b, -b])
        self.matrix = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        if measure is None:
            self.measure = region.m.copy()
        else:
            self.measure = _as_vector(region, measure)
            if np.any(~(self.measure > 0)):
                raise DomainError("measure must be strictly positive")
        self._cache: dict = {}

    @property
    def size(self) -> int:
        return self.region.size

    def matvec(self, u) -> np.ndarray:
        return self.matrix @ np.asarray(u, dtype=float)

    def form(self, u, v=None) -> float:
        u = np.asarray(u, dtype=float)
        v = u if v is None else np.asarray(v, dtype=float)
        return float(v @ (self.matrix @ u))

    def dense(self) -> np.ndarray:
        if "dense" not in self._cache:
            self._cache["dense"] = self.matrix.toarray()
        return self._cache["dense"]

    def components(self) -> np.ndarray:
        """Connected component label per region vertex (induced edges)."""
        if "components" not in self._cache:
            adj = self.matrix.copy()
            adj.setdiag(0)
            adj.eliminate_zeros()
            _, labels = csgraph.connected_components(adj, directed=False)
            self._cache["components"] = labels
        return self._cache["components"]

    def with_measure(self, measure) -> "DirichletSystem":
        return DirichletSystem(self.region, measure)

    def __repr__(self):
        return f"DirichletSystem(level={self.region.level}, size={self.size})"


def _as_vector(region: FiniteRegion, f) -> np.ndarray:
    if isinstance(f, RegionFunction):
        return f.on(region).values.copy()
    if callable(f):
        return region.evaluate(f)
    arr = np.asarray(f, dtype=float)
    if arr.ndim == 0:
        return np.full(region.size, float(arr))
    if arr.shape != (region.size,):
        raise DomainError(f"expected {region.size} values, got shape {arr.shape}")
    return arr.astype(float)


def assemble(family: ExhaustionFamily, n: int, measure=None) -> DirichletSystem:
    """Dirichlet system of the level-``n`` region."""
    return DirichletSystem(family.region(n), measure)


# ---------------------------------------------------------------------------
# linear solves


def pcg(matvec, rhs, precond_diag=None, rtol=SOLVE_RTOL, maxiter=None):
    """Jacobi-preconditioned conjugate gradients.

    Returns ``(x, iterations)``.  A direction of nonpositive curvature raises
    :class:`DefinitenessError` carrying that direction.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[0]
    maxiter = maxiter or 10 * n + 100
    x = np.zeros(n)
    r = rhs.copy()
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return x, 0
    inv_d = None if precond_diag is None else 1.0 / precond_diag
    z = r if inv_d is None else inv_d * r
    p = z.copy()
    rz = r @ z
    for it in range(1, maxiter + 1):
        Ap = matvec(p)
        pAp = p @ Ap
        if pAp <= 0:
            raise DefinitenessError("matrix is not positive definite (CG curvature <= 0)", direction=p, value=pAp)
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= rtol * bnorm:
            return x, it
        z = r if inv_d is None else inv_d * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(
        "CG did not converge",
        diagnostics={"iterations": maxiter, "residual": float(np.linalg.norm(r) / bnorm)},
    )


def _offending_direction(matrix) -> tuple[np.ndarray, float]:
    n = matrix.shape[0]
    if n <= 3000:
        vals, vecs = sla.eigh(matrix.toarray(), subset_by_index=[0, 0])
        return vecs[:, 0], float(vals[0])
    vals, vecs = spla.eigsh(matrix, k=1, which="SA")
    return vecs[:, 0], float(vals[0])


def _factor(system: DirichletSystem, shift: float = 0.0, method: str = "auto"):
    """Cached factorization of ``H_K - shift * m``; returns a solve callable."""
    key = ("factor", float(shift), method)
    if key in system._cache:
        return system._cache[key]
    mat = system.matrix - shift * sp.diags(system.measure) if shift else system.matrix
    n = system.size
    if method == "auto":
        method = "dense" if n < DENSE_MAX else ("sparse" if n <= DIRECT_MAX else "cg")
    if method == "dense":
        try:
            cf = sla.cho_factor(mat.toarray(), lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            direction, value = _offending_direction(mat)
            raise DefinitenessError(
                f"Dirichlet system is not positive definite (bottom eigenvalue {value:.3e})",
                direction=direction,
                value=value,
            ) from None
        solve = functools.partial(sla.cho_solve, cf, check_finite=False)
    elif method == "sparse":
        try:
            lu = spla.splu(mat.tocsc())
        except RuntimeError:
            direction, value = _offending_direction(mat)
            raise DefinitenessError("Dirichlet system is singular", direction=direction, value=value) from None
        solve = lu.solve
    elif method == "cg":
        mat_csr = mat.tocsr()
        diag = mat_csr.diagonal()
        if np.any(diag <= 0):
            k = int(np.argmin(diag))
            e = np.zeros(n)
            e[k] = 1.0
            raise DefinitenessError("nonpositive diagonal entry", direction=e, value=float(diag[k]))

        def solve(rhs):
            x, _ = pcg(mat_csr.__matmul__, rhs, precond_diag=diag)
            return x

    else:
        raise DomainError(f"unknown solve method {method!r}")
    system._cache[key] = solve
    return solve


def solve(system: DirichletSystem, rhs, shift: float = 0.0, method: str = "auto") -> np.ndarray:
    """Solve ``(H_K - shift * m) u = rhs``."""
    return _factor(system, shift, method)(np.asarray(rhs, dtype=float))


def solve_green(system: DirichletSystem, x, method: str = "auto") -> RegionFunction:
    """Solve ``H_K g = 1_x``.

    ``H_K`` has nonpositive off-diagonal entries, so a solution that is
    strictly positive on the component of ``x`` certifies positive
    definiteness on that component.  Any failure of that certificate raises
    :class:`DefinitenessError` with the offending direction.
    """
    k = system.region.idx(x)
    e = np.zeros(system.size)
    e[k] = 1.0
    g = solve(system, e, method=method)
    comp = system.components() == system.components()[k]
    scale = np.max(np.abs(g)) if g.size else 1.0
    if not np.all(g[comp] > 1e-14 * scale) or not np.all(np.isfinite(g)):
        direction, value = _offending_direction(system.matrix)
        raise DefinitenessError(
            f"Dirichlet system is not positive definite (bottom eigenvalue {value:.3e})",
            direction=direction,
            value=value,
        )
    res = np.linalg.norm(system.matvec(g) - e)
    if res > 1e-10 * max(1.0, np.linalg.norm(system.matrix.data, np.inf) * np.linalg.norm(g)):
        raise ConvergenceError("Green solve residual too large", diagnostics={"residual": float(res)})
    return RegionFunction(system.region, g)


# ---------------------------------------------------------------------------
# bottom of the spectrum


@dataclass(frozen=True)
class EigenPair:
    """Smallest eigenvalue of the pencil ``(H_K, diag(weight))``.

    ``vector`` is nonnegative and normalized in ``ℓ²(K, weight)``.
    """

    value: float
    vector: RegionFunction
    residual: float
    iterations: int = 0
    method: str = "rqi"
    diagnostics: dict = field(default_factory=dict)


def _weighted_norm(v, w):
    return math.sqrt(float(np.dot(w * v, v)))


def _rq(A, w, v):
    return float(v @ (A @ v)) / float(np.dot(w * v, v))


def _residual(A, w, v, rho):
    r = A @ v - rho * (w * v)
    pos = w > 0
    scaled = np.where(pos, r / np.sqrt(np.where(pos, w, 1.0)), r)
    return float(np.linalg.norm(scaled))


def _scale(A, w):
    d = A.diagonal()
    off = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(d)
    pos = w > 0
    if not pos.any():
        return 1.0
    return max(1.0, float(np.max((np.abs(d[pos]) + off[pos]) / w[pos])))


def _bottom_component(A, w, tol, maxiter):
    """Shifted inverse iteration, then Rayleigh quotient iteration.

    The start vector is the positive constant; the result is accepted only
    if the eigenvector keeps a constant sign, which on a connected region
    singles out the bottom eigenvalue.
    """
    n = A.shape[0]
    if n == 1:
        val = float(A[0, 0]) / float(w[0])
        return val, np.array([1.0 / math.sqrt(w[0])]), 0.0, 0
    A = sp.csc_matrix(A)
    W = sp.diags(w)
    d = A.diagonal()
    off = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(d)
    pos = w > 0
    scale = _scale(A, w)
    sigma = float(np.min((d[pos] - off[pos]) / w[pos]))
    sigma -= 1e-2 * max(1.0, abs(sigma))
    v = np.ones(n)
    v /= _weighted_norm(v, w)
    rho = _rq(A, w, v)
    its = 0
    try:
        lu = spla.splu((A - sigma * W).tocsc())
        for its in range(1, 31):
            y = lu.solve(w * v)
            v = y / _weighted_norm(y, w)
            rho_new = _rq(A, w, v)
            done = abs(rho_new - rho) <= 1e-6 * max(abs(rho_new - sigma), 1e-300)
            rho = rho_new
            if done:
                break
    except RuntimeError:
        pass
    res = _residual(A, w, v, rho)
    for _ in range(maxiter):
        if res <= 1e-14 * scale:
            break
        its += 1
        try:
            y = spla.splu((A - rho * W).tocsc()).solve(w * v)
        except RuntimeError:
            break
        if not np.all(np.isfinite(y)):
            break
        y = y / _weighted_norm(y, w)
        if y.sum() < 0:
            y = -y
        rho_new = _rq(A, w, y)
        res_new = _residual(A, w, y, rho_new)
        if res_new >= res and res <= tol * scale:
            break
        v, rho, res = y, rho_new, res_new
    if v.sum() < 0:
        v = -v
    return rho, v, res / scale, its


def _bottom_pair(A, w, tol=EIG_TOL, maxiter=60, labels=None):
    A = sp.csr_matrix(A)
    n = A.shape[0]
    if labels is None:
        _, labels = csgraph.connected_components(A, directed=False)
    best = None
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        wc = w[idx]
        if not np.any(wc > 0):
            continue
        Ac = A[idx][:, idx]
        rho, vc, res, its = _bottom_component(Ac, wc, tol, maxiter)
        vmax = np.max(np.abs(vc))
        if res > tol or np.any(vc < -1e-10 * vmax):
            raise ConvergenceError(
                "bottom eigenpair iteration failed",
                diagnostics={"component_size": len(idx), "residual": res, "iterations": its, "value": rho},
            )
        if best is None or rho < best[0]:
            v = np.zeros(n)
            v[idx] = np.clip(vc, 0.0, None)
            best = (rho, v, res, its)
    if best is None:
        raise DegenerateWeightError("weight vanishes identically on the region")
    return best


def lambda_min(system: DirichletSystem) -> EigenPair:
    """Smallest eigenpair of ``m^{-1} H_K`` (cached on the system)."""
    if "lambda_min" not in system._cache:
        val, vec, res, its = _bottom_pair(system.matrix, system.measure, labels=system.components())
        system._cache["lambda_min"] = EigenPair(val, RegionFunction(system.region, vec), res, its)
    return system._cache["lambda_min"]


def generalized_bottom(system: DirichletSystem, w) -> EigenPair:
    """Bottom of the pencil ``(H_K, diag w)`` with its eigenvector."""
    wv = _as_vector(system.region, w)
    if np.any(wv < 0):
        raise DomainError("weight must be nonnegative")
    if not np.any(wv > 0):
        raise DegenerateWeightError("weight vanishes identically on the region")
    val, vec, res, its = _bottom_pair(system.matrix, wv, labels=system.components())
    return EigenPair(val, RegionFunction(system.region, vec), res, its)


def generalized_lambda_min(system: DirichletSystem, w) -> float:
    """``inf h(φ) / Σ w φ²`` over ``φ`` supported in the region.

    ``h - w >= 0`` on ``C_c(K)`` iff the returned value is ``>= 1``.  Where
    ``w`` vanishes the quotient is still an infimum over all of ``C_c(K)``.
    """
    return generalized_bottom(system, w).value


# ---------------------------------------------------------------------------
# resolvent and heat semigroup


def resolvent_apply(system: DirichletSystem, lam: float, f) -> RegionFunction:
    """Solve ``(H_K - λ m) u = m f`` for ``λ`` below the bottom eigenvalue."""
    lam = float(lam)
    bottom = lambda_min(system).value
    if not lam < bottom:
        raise SpectralParameterError(f"spectral parameter {lam} is not below lambda_min = {bottom}")
    fv = _as_vector(system.region, f)
    if not np.any(fv):
        return RegionFunction(system.region, np.zeros(system.size))
    u = solve(system, system.measure * fv, shift=lam)
    return RegionFunction(system.region, u)


def spectrum(system: DirichletSystem):
    """Full pencil eigendecomposition ``(values, V)`` with ``Vᵀ m V = I`` (cached)."""
    if "spectrum" not in system._cache:
        vals, vecs = sla.eigh(system.dense(), np.diag(system.measure))
        system._cache["spectrum"] = (vals, vecs)
    return system._cache["spectrum"]


def heat_apply(system: DirichletSystem, t: float, f) -> RegionFunction:
    """``exp(-t m^{-1} H_K) f``."""
    t = float(t)
    if t < 0 or not math.isfinite(t):
        raise DomainError("time must be a finite nonnegative number")
    fv = _as_vector(system.region, f)
    if t == 0.0:
        return RegionFunction(system.region, fv)
    if system.size < DENSE_MAX:
        vals, V = spectrum(system)
        coef = V.T @ (system.measure * fv)
        out = V @ (np.exp(-t * vals) * coef)
    else:
        op = sp.diags(1.0 / system.measure) @ system.matrix
        out = spla.expm_multiply(-t * op.tocsc(), fv)
    return RegionFunction(system.region, out)
