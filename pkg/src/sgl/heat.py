"""Heat kernels on truncations and their large-time / near-critical limits."""

from __future__ import annotations

import csv
from dataclasses import dataclass
import io
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, DomainError
from .solver import DirichletSystem, heat_apply, solve, spectrum


def _require_counting_measure(system: DirichletSystem):
    if not np.allclose(system.measure, 1.0, rtol=0, atol=0):
        raise DomainError("heat kernels use the counting measure (m = 1)")


def heat_kernel(system: DirichletSystem, t: float, x, y) -> float:
    """``p_t(x, y) = e^{-t H_K} 1_x (y)`` with ``m = 1``."""
    _require_counting_measure(system)
    reg = system.region
    return float(heat_apply(system, t, reg.indicator(x))(y))


def _bottom_two(system):
    vals, vecs = spectrum(system)
    lam0 = float(vals[0])
    gap = float(vals[1] - vals[0]) if len(vals) > 1 else math.inf
    psi = vecs[:, 0] * (1.0 if vecs[:, 0].sum() >= 0 else -1.0)
    return vals, vecs, lam0, gap, psi


def log_heat_kernel(system: DirichletSystem, t: float, x, y) -> float:
    """``log p_t(x, y)`` computed without underflow through the spectrum."""
    _require_counting_measure(system)
    vals, vecs = spectrum(system)
    i, j = system.region.idx(x), system.region.idx(y)
    coef = vecs[i, :] * vecs[j, :]
    shifted = np.exp(-(vals - vals[0]) * t) * coef
    total = math.fsum(shifted)
    if total <= 0:
        return -math.inf
    return -vals[0] * t + math.log(total)


@dataclass
class RateEstimate:
    """Large-time decay rate of ``p_t(x, y)``.

    ``estimate`` is the log-slope between the last two grid times, which
    removes the ``Ψ(x)Ψ(y)`` prefactor; ``raw_rate`` is ``-log p_t / t`` at
    the last time.  ``bound`` bounds ``|raw_rate - λ₀|``.
    """

    estimate: float
    raw_rate: float
    lambda0: float
    gap: float
    bound: float
    slope_bound: float
    times: list
    log_p: list


def long_time_rate(system: DirichletSystem, x, y, t_grid) -> RateEstimate:
    """Estimate ``λ₀`` from ``-log p_t(x, y) / t`` on an increasing time grid."""
    t_grid = [float(t) for t in t_grid]
    if len(t_grid) < 2 or any(b <= a for a, b in zip(t_grid, t_grid[1:])) or t_grid[0] <= 0:
        raise DomainError("t_grid must be positive and strictly increasing with at least two points")
    vals, vecs, lam0, gap, psi = _bottom_two(system)
    logs = []
    for t in t_grid:
        p = heat_kernel(system, t, x, y) if system.size < 500 else None
        logs.append(math.log(p) if p is not None and p > 1e-280 else log_heat_kernel(system, t, x, y))
    T = t_grid[-1]
    raw = -logs[-1] / T
    slope = -(logs[-1] - logs[-2]) / (t_grid[-1] - t_grid[-2])
    i, j = system.region.idx(x), system.region.idx(y)
    pp = psi[i] * psi[j]
    # p_t = e^{-λ₀ t} (ΨΨ + E_t) with |E_t| <= e^{-gap t} (Cauchy-Schwarz on the spectral sum)
    tail = math.exp(-gap * T) if math.isfinite(gap) else 0.0
    rel = tail / pp if pp > 0 else math.inf
    bound = (abs(math.log(pp)) + (-math.log1p(-rel) if rel < 1 else math.inf)) / T if pp > 0 else math.inf
    t0 = t_grid[-2]
    rel0 = (math.exp(-gap * t0) if math.isfinite(gap) else 0.0) / pp if pp > 0 else math.inf
    slope_bound = 2 * rel0 / (1 - rel0) / (T - t0) if rel0 < 1 else math.inf
    return RateEstimate(slope, raw, lam0, gap, bound, slope_bound, t_grid, logs)


@dataclass
class GroundStateLimit:
    value: float
    psi_product: float
    time_stepped: float
    t_used: float
    gap: float


def heat_gs_limit(system: DirichletSystem, x, y, t_large: float | None = None) -> GroundStateLimit:
    """``lim e^{λ₀ t} p_t(x, y)`` two ways: spectral projection and time stepping.

    The time-stepped value applies ``exp(-t (H_K - λ₀))`` to ``1_x`` with
    ``t`` large enough that ``e^{-gap t} < 1e-14``.
    """
    _require_counting_measure(system)
    vals, vecs, lam0, gap, psi = _bottom_two(system)
    if gap <= 1e-12 * max(1.0, abs(lam0)):
        raise ConvergenceError("bottom eigenvalue is not simple", diagnostics={"gap": gap})
    i, j = system.region.idx(x), system.region.idx(y)
    proj = float(psi[i] * psi[j])
    if t_large is None:
        t_large = 33.0 / gap if math.isfinite(gap) else 1.0
    shifted = (system.matrix - lam0 * sp.identity(system.size)).tocsc()
    e = system.region.indicator(x)
    stepped = float(spla.expm_multiply(-t_large * shifted, e)[j])
    return GroundStateLimit(proj, proj, stepped, float(t_large), gap)


def default_lambda_grid(k_max: int = 20) -> np.ndarray:
    return -(2.0 ** -np.arange(1, k_max + 1))


@dataclass
class LambdaGreenLimit:
    lambdas: np.ndarray
    values: np.ndarray
    limit: float
    lambda_min: float


def lambda_green_limit(system: DirichletSystem, w, x, x0, lambdas=None) -> LambdaGreenLimit:
    """``(-λ) G_λ(x, x0)`` with ``(H - λ w) G_λ(·, x0) = 1_{x0}``, ``λ ↗ 0``.

    The comparison limit is ``φ(x)φ(x0)`` for the ``ℓ²(w)``-normalized
    bottom eigenvector when the pencil's bottom eigenvalue is 0, else 0.
    """
    lambdas = default_lambda_grid() if lambdas is None else np.asarray(lambdas, dtype=float)
    if np.any(lambdas >= 0):
        raise DomainError("every spectral parameter must be negative")
    wsys = system.with_measure(w)
    if np.any(~(wsys.measure > 0)):
        raise DomainError("weight must be positive on the region")
    i, j = wsys.region.idx(x), wsys.region.idx(x0)
    ev, V = spectrum(wsys)
    bottom = float(ev[0])
    tol = 1e-10 * max(1.0, abs(ev[-1]))
    if bottom < -tol:
        raise DomainError(f"lambda_min = {bottom:.3e} < 0; the form is not nonnegative")
    rhs = wsys.region.indicator(x0)
    vals = np.array([(-lam) * solve(wsys, rhs, shift=lam)[i] for lam in lambdas])
    if abs(bottom) <= tol:
        phi = V[:, 0]
        limit = float(phi[i] * phi[j])
    else:
        limit = 0.0
    return LambdaGreenLimit(lambdas, vals, limit, bottom)


def series_csv(header, rows) -> str:
    """CSV text with a header row; floats use ``repr`` for exact round trips."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def heat_series_csv(system: DirichletSystem, x, y, times) -> str:
    """``t,p_t`` rows for plotting."""
    return series_csv(["t", "p_t"], [(float(t), heat_kernel(system, t, x, y)) for t in times])


def lambda_green_csv(result: LambdaGreenLimit) -> str:
    """``lambda,minus_lambda_G`` rows for plotting."""
    return series_csv(["lambda", "minus_lambda_G"], zip(result.lambdas.tolist(), result.values.tolist()))
