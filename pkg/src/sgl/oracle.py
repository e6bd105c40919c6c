"""Brute-force and closed-form oracles.

Nothing here calls into :mod:`sgl.solver`: matrices are rebuilt straight from
the model's neighbor lists and handled with dense numpy routines only, so a
bug in the main solvers cannot be mirrored here.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ive

from .errors import DefinitenessError, DomainError
from .forms import RegionFunction
from .graph import ExhaustionFamily, FiniteRegion, GraphModel, from_edges

ORACLE_MAX = 2000


def dense_matrix(region: FiniteRegion) -> np.ndarray:
    """``H_K`` rebuilt from neighbor enumeration (full degree on the diagonal)."""
    model = region.model
    n = region.size
    if n > ORACLE_MAX:
        raise DomainError(f"oracle limited to {ORACLE_MAX} vertices")
    A = np.zeros((n, n))
    for i, x in enumerate(region.vertices):
        A[i, i] += model.q(x)
        for y, w in model.neighbors(x):
            A[i, i] += w
            j = region.index.get(y)
            if j is not None:
                A[i, j] -= w
    return A


def dense_green(region: FiniteRegion, x) -> RegionFunction:
    """Direct dense solve of ``H_K g = 1_x``."""
    A = dense_matrix(region)
    bottom = np.linalg.eigvalsh(A)[0]
    if bottom <= 1e-13 * max(1.0, np.abs(A).max()):
        raise DefinitenessError(f"H_K is not positive definite (bottom eigenvalue {bottom:.3e})", value=bottom)
    e = np.zeros(region.size)
    e[region.index[x]] = 1.0
    return RegionFunction(region, np.linalg.solve(A, e))


@dataclass
class DenseSpectrum:
    """All eigenpairs of ``m^{-1} H_K``; columns of ``vectors`` are m-orthonormal."""

    values: np.ndarray
    vectors: np.ndarray
    residual: float


def dense_spectrum(region: FiniteRegion, m=None) -> DenseSpectrum:
    """Full eigendecomposition through the ``m^{-1/2}``-symmetrized matrix."""
    A = dense_matrix(region)
    if m is None:
        mv = np.array([region.model.m(v) for v in region.vertices])
    elif callable(m):
        mv = np.array([float(m(v)) for v in region.vertices])
    else:
        mv = np.broadcast_to(np.asarray(m, dtype=float), (region.size,)).copy()
    s = 1.0 / np.sqrt(mv)
    S = s[:, None] * A * s[None, :]
    vals, U = np.linalg.eigh(S)
    V = s[:, None] * U
    recon = (np.sqrt(mv)[:, None] * U) @ np.diag(vals) @ (np.sqrt(mv)[:, None] * U).T
    residual = float(np.abs(recon - A).max() / max(1.0, np.abs(A).max()))
    return DenseSpectrum(vals, V, residual)


# ---------------------------------------------------------------------------
# lattice Green function


def _scaled_i0(x):
    """``e^{-x} I_0(x)``; the Hankel expansion takes over where ``ive`` gives nan."""
    x = np.asarray(x, dtype=float)
    big = x > 1e6
    xb = np.where(big, x, 1.0)
    asym = (1 + 1 / (8 * xb) + 9 / (128 * xb**2)) / np.sqrt(2 * np.pi * xb)
    return np.where(big, asym, ive(0, np.where(big, 0.0, x)))


def _gl_integral(f, a, b, panels, nodes):
    x, wts = leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    return float(np.sum(np.repeat(half, nodes) * np.tile(wts, panels) * f(pts)))


def lattice_green_quadrature(d: int, tol: float = 1e-6, return_error: bool = False, panels: int = 25):
    """``G_{Z^d}(0,0) = (2π)^{-d} ∫ (2Σ(1 - cos θ_i))^{-1} dθ`` for unit weights.

    Writing ``1/a = ∫_0^∞ e^{-at} dt`` factorizes the angular integral into
    ``(e^{-2t} I_0(2t))^d``; the remaining 1-D integral over ``t = e^s`` is
    done with composite Gauss-Legendre, doubling panels until two successive
    values differ by less than ``tol``.  That difference is the error
    estimate.
    """
    if d < 3:
        raise DomainError("lattice Green function diverges for d < 3 (recurrent lattice)")
    s_lo, s_hi = -40.0, 50.0

    def integrand(s):
        t = np.exp(s)
        return _scaled_i0(2.0 * t) ** d * t

    # [0, e^{s_lo}] where the integrand is 1 to first order, and the
    # (4πt)^{-d/2} tail beyond e^{s_hi}
    head = math.exp(s_lo)
    T = math.exp(s_hi)
    tail = (4 * math.pi) ** (-d / 2) * T ** (1 - d / 2) / (d / 2 - 1)
    prev = _gl_integral(integrand, s_lo, s_hi, panels, 8) + head + tail
    err = math.inf
    for _ in range(12):
        panels *= 2
        cur = _gl_integral(integrand, s_lo, s_hi, panels, 8) + head + tail
        err = abs(cur - prev)
        prev = cur
        if err <= tol:
            break
    if return_error:
        return prev, err
    return prev


# ---------------------------------------------------------------------------
# Monte Carlo recurrence evidence


@dataclass
class ReturnEstimate:
    """Estimated ``Σ_{n <= horizon} P^n(x, x)`` per horizon with 95% half-widths."""

    horizons: list
    estimates: np.ndarray
    half_widths: np.ndarray
    trials: int
    seed: int


def _check_zero_potential(model):
    if not getattr(model, "potential_is_zero", False):
        raise DomainError("random walk transition matrix needs q ≡ 0")


def _lattice_walk(d, x, horizons, trials, rng, chunk=5000):
    horizons = sorted(horizons)
    H = horizons[-1]
    visits = np.zeros((len(horizons), trials))
    start = np.asarray(x if isinstance(x, tuple) else (x,), dtype=np.int64)
    for lo in range(0, trials, chunk):
        k = min(chunk, trials - lo)
        pos = np.tile(start, (k, 1))
        count = np.ones(k)
        hi = 0
        while hi < len(horizons) and horizons[hi] == 0:
            visits[hi, lo : lo + k] = count
            hi += 1
        for n in range(1, H + 1):
            move = rng.integers(0, 2 * d, size=k)
            axis = move >> 1
            pos[np.arange(k), axis] += 2 * (move & 1) - 1
            count += np.all(pos == start, axis=1)
            while hi < len(horizons) and horizons[hi] == n:
                visits[hi, lo : lo + k] = count
                hi += 1
    return visits


def _generic_walk(model, x, horizons, trials, rng):
    horizons = sorted(horizons)
    H = horizons[-1]
    visits = np.zeros((len(horizons), trials))
    cache = {}
    for k in range(trials):
        cur = x
        count = 1.0
        hi = 0
        while hi < len(horizons) and horizons[hi] == 0:
            visits[hi, k] = count
            hi += 1
        for n in range(1, H + 1):
            if cur not in cache:
                nb = model.neighbors(cur)
                if model.q(cur) != 0.0:
                    raise DomainError("random walk transition matrix needs q ≡ 0")
                ys = [y for y, _ in nb]
                p = np.array([w for _, w in nb])
                cache[cur] = (ys, np.cumsum(p) / p.sum())
            ys, cdf = cache[cur]
            cur = ys[min(int(np.searchsorted(cdf, rng.random(), side="right")), len(ys) - 1)]
            count += cur == x
            while hi < len(horizons) and horizons[hi] == n:
                visits[hi, k] = count
                hi += 1
    return visits


def rw_return_estimate(model_or_family, x, horizon, trials: int = 1000, seed: int = 0) -> ReturnEstimate:
    """Monte Carlo estimate of the expected number of visits to ``x`` up to ``horizon``.

    ``horizon`` may be an int or a list; all horizons share the same walks.
    Walks follow ``P = D^{-1}A`` and need ``q ≡ 0``.  Lattices with uniform
    weights use a vectorized walker.
    """
    model = model_or_family.model if isinstance(model_or_family, ExhaustionFamily) else model_or_family
    _check_zero_potential(model)
    model.check(x)
    horizons = sorted({int(h) for h in np.atleast_1d(horizon)})
    if horizons[0] < 0 or trials < 1:
        raise DomainError("horizons must be >= 0 and trials >= 1")
    rng = np.random.default_rng(seed)
    if getattr(model, "lattice_dim", None):
        visits = _lattice_walk(model.lattice_dim, x, horizons, trials, rng)
    else:
        visits = _generic_walk(model, x, horizons, trials, rng)
    est = visits.mean(axis=1)
    hw = 1.96 * visits.std(axis=1, ddof=1) / math.sqrt(trials) if trials > 1 else np.full(len(horizons), math.inf)
    return ReturnEstimate(horizons, est, hw, trials, seed)


# ---------------------------------------------------------------------------
# random test graphs


def random_test_graph(n: int, seed, p: float | None = None, potential: str = "nonneg", measure: bool = False) -> GraphModel:
    """Connected Erdős–Rényi graph on ``range(n)`` with weights in (0, 1].

    ``potential`` is ``"zero"``, ``"nonneg"`` (uniform [0, 1)), or
    ``"shifted"``: uniform [-1, 1) shifted so that the full-graph operator
    has bottom eigenvalue 0.05 as certified by :func:`dense_spectrum`.
    """
    rng = np.random.default_rng(seed)
    if p is None:
        p = min(1.0, 2.5 * math.log(max(n, 2)) / max(n, 2))
    for _ in range(1000):
        iu, ju = np.triu_indices(n, 1)
        mask = rng.random(iu.size) < p
        edges = [(int(i), int(j), float(1.0 - rng.random())) for i, j in zip(iu[mask], ju[mask])]
        if n == 1 or _connected(n, edges):
            break
    else:  # pragma: no cover - astronomically unlikely
        raise RuntimeError("could not draw a connected graph")
    if potential == "zero":
        q = {}
    elif potential == "nonneg":
        q = {i: float(v) for i, v in enumerate(rng.random(n))}
    elif potential == "shifted":
        q = {i: float(v) for i, v in enumerate(rng.uniform(-1, 1, n))}
    else:
        raise DomainError(f"unknown potential mode {potential!r}")
    m = {i: float(v) for i, v in enumerate(rng.uniform(0.5, 2.0, n))} if measure else {}
    model = from_edges(range(n), edges, q=q, m=m, name=f"random-{n}")
    if potential == "shifted":
        from .graph import materialize

        bottom = dense_spectrum(materialize(model, range(n)), m=np.ones(n)).values[0]
        q = {i: v - bottom + 0.05 for i, v in q.items()}
        model = from_edges(range(n), edges, q=q, m=m, name=f"random-{n}")
    return model


def _connected(n, edges):
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j, _ in edges:
        parent[find(i)] = find(j)
    return len({find(i) for i in range(n)}) == 1
