import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgl import (
    DirichletSystem,
    DomainError,
    heat_gs_limit,
    heat_kernel,
    lambda_green_limit,
    lambda_min,
    lattice,
    long_time_rate,
    materialize,
    random_test_graph,
    resolvent_apply,
)
from sgl.heat import heat_series_csv, lambda_green_csv, log_heat_kernel

from conftest import single_vertex, two_vertex

seeds = st.integers(0, 2**31 - 1)


def system_of(model, verts=None, measure=None):
    return DirichletSystem(materialize(model, model.vertices if verts is None else verts), measure)


PAIR = system_of(two_vertex())
SINGLE = system_of(single_vertex(q=2.0))
SEGMENT9 = DirichletSystem(materialize(lattice(1), range(1, 10)))


# -- heat kernel -------------------------------------------------------------


def test_heat_single_vertex():
    assert heat_kernel(SINGLE, 1.0, 0, 0) == pytest.approx(math.exp(-2), rel=1e-14)


@pytest.mark.parametrize("t", [0.0, 0.1, 1.0, 5.0, 30.0])
def test_heat_two_vertex_diagonal(t):
    assert heat_kernel(PAIR, t, 1, 1) == pytest.approx((1 + math.exp(-2 * t)) / 2, rel=1e-12)
    assert heat_kernel(PAIR, t, 1, 2) == pytest.approx((1 - math.exp(-2 * t)) / 2, rel=1e-10, abs=1e-15)


def test_heat_identity_at_zero():
    assert heat_kernel(SEGMENT9, 0.0, 3, 5) == 0.0
    assert heat_kernel(SEGMENT9, 0.0, 3, 3) == 1.0


def test_heat_rejects_measure():
    with pytest.raises(DomainError):
        heat_kernel(system_of(two_vertex(), measure=2.0), 1.0, 1, 1)


def test_log_heat_kernel_no_underflow():
    sys_ = system_of(single_vertex(q=2.0))
    assert log_heat_kernel(sys_, 1e4, 0, 0) == pytest.approx(-2e4, rel=1e-14)


# -- long time rate ----------------------------------------------------------


def test_rate_two_vertex():
    rate = long_time_rate(PAIR, 1, 1, [10.0, 20.0, 40.0])
    assert rate.lambda0 == pytest.approx(0.0, abs=1e-12)
    assert abs(rate.estimate) < 1e-12
    assert abs(rate.raw_rate - rate.lambda0) <= rate.bound + 1e-12


def test_rate_single_vertex_exact():
    rate = long_time_rate(SINGLE, 0, 0, [1.0, 2.0])
    assert rate.estimate == pytest.approx(2.0, rel=1e-14)
    assert rate.raw_rate == pytest.approx(2.0, rel=1e-14)


def test_rate_segment():
    target = 4 * math.sin(math.pi / 20) ** 2
    rate = long_time_rate(SEGMENT9, 5, 5, [100.0, 150.0, 200.0])
    assert rate.gap * 200 >= 20
    assert abs(rate.estimate - target) < 1e-4
    assert abs(rate.estimate - rate.lambda0) <= rate.slope_bound + 1e-12
    assert abs(rate.raw_rate - rate.lambda0) <= rate.bound * (1 + 1e-12)


def test_rate_underflow_path():
    # p_t ~ e^{-2000}: computed through the spectrum
    sys_ = system_of(single_vertex(q=2.0))
    rate = long_time_rate(sys_, 0, 0, [500.0, 1000.0])
    assert rate.estimate == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("grid", [[1.0], [2.0, 1.0], [0.0, 1.0]])
def test_rate_bad_grid(grid):
    with pytest.raises(DomainError):
        long_time_rate(PAIR, 1, 1, grid)


# -- ground-state limit ------------------------------------------------------


@pytest.mark.parametrize("x, y", [(1, 1), (1, 2)])
def test_gs_limit_two_vertex(x, y):
    lim = heat_gs_limit(PAIR, x, y)
    assert lim.value == pytest.approx(0.5, rel=1e-12)
    assert lim.time_stepped == pytest.approx(lim.value, abs=1e-8)


def test_gs_limit_single_vertex():
    lim = heat_gs_limit(SINGLE, 0, 0)
    assert lim.value == pytest.approx(1.0) and lim.time_stepped == pytest.approx(1.0, abs=1e-8)


def test_gs_limit_segment_paths_agree():
    lim = heat_gs_limit(SEGMENT9, 2, 7)
    psi = np.sin(np.pi * np.arange(1, 10) / 10)
    psi /= np.linalg.norm(psi)
    assert lim.value == pytest.approx(psi[1] * psi[6], rel=1e-10)
    assert abs(lim.time_stepped - lim.value) <= 1e-8


# -- λ G_λ limit -------------------------------------------------------------


def test_lambda_green_two_vertex():
    res = lambda_green_limit(PAIR, 1.0, 1, 1)
    lam = res.lambdas
    # (H - λ)^{-1}(1,1) = (1 - λ) / (λ² - 2λ), times -λ
    np.testing.assert_allclose(res.values, (1 - lam) / (2 - lam), rtol=1e-10)
    assert res.limit == pytest.approx(0.5, rel=1e-10)
    assert abs(res.values[-1] - res.limit) < 1e-5


def test_lambda_green_single_vertex():
    res = lambda_green_limit(SINGLE, 1.0, 0, 0)
    np.testing.assert_allclose(res.values, -res.lambdas / (2 - res.lambdas), rtol=1e-12)
    assert res.limit == 0.0


def test_lambda_green_weighted():
    res = lambda_green_limit(PAIR, {1: 1.0, 2: 4.0}.get, 1, 1)
    assert res.limit == pytest.approx(0.2, rel=1e-10)
    assert abs(res.values[-1] - 0.2) < 1e-5


@pytest.mark.parametrize("lambdas", [[-1.0, 0.0], [0.5]])
def test_lambda_green_rejects_nonnegative(lambdas):
    with pytest.raises(DomainError):
        lambda_green_limit(PAIR, 1.0, 1, 1, lambdas=lambdas)


def test_lambda_green_rejects_negative_form():
    with pytest.raises(DomainError):
        lambda_green_limit(system_of(two_vertex(q=(-1.0, 0.0))), 1.0, 1, 1)


# -- CSV ---------------------------------------------------------------------


def test_csv_outputs_round_trip():
    rows = list(csv.reader(io.StringIO(heat_series_csv(PAIR, 1, 1, [0.0, 1.0]))))
    assert rows[0] == ["t", "p_t"]
    assert float(rows[2][1]) == heat_kernel(PAIR, 1.0, 1, 1)
    rows = list(csv.reader(io.StringIO(lambda_green_csv(lambda_green_limit(PAIR, 1.0, 1, 1)))))
    assert rows[0] == ["lambda", "minus_lambda_G"] and len(rows) == 21


# -- properties --------------------------------------------------------------


def random_system(seed, n):
    model = random_test_graph(n, seed)
    rng = np.random.default_rng(seed + 1)
    verts = [v for v in model.vertices if rng.random() < 0.9] or [0]
    return DirichletSystem(materialize(model, verts))


@given(seed=seeds, n=st.integers(2, 60), t=st.floats(0.0, 5.0), s=st.floats(0.0, 5.0))
def test_semigroup_and_positivity(seed, n, t, s):
    sys_ = random_system(seed, n)
    verts = sys_.region.vertices
    rng = np.random.default_rng(seed)
    x, y = (verts[k] for k in rng.integers(0, len(verts), 2))
    pt = np.array([heat_kernel(sys_, t, x, z) for z in verts])
    ps = np.array([heat_kernel(sys_, s, z, y) for z in verts])
    assert heat_kernel(sys_, t + s, x, y) == pytest.approx(math.fsum(pt * ps), abs=1e-9)
    assert pt.min() >= -1e-12
    assert heat_kernel(sys_, t, x, y) == pytest.approx(heat_kernel(sys_, t, y, x), abs=1e-12)


@given(seed=seeds, n=st.integers(2, 60))
def test_gs_limit_paths_agree(seed, n):
    sys_ = random_system(seed, n)
    labels = sys_.components()
    root = int(np.argmax(lambda_min(sys_).vector.values))
    comp = [v for k, v in enumerate(sys_.region.vertices) if labels[k] == labels[root]]
    # restrict to the component carrying the bottom so that it is simple
    sub = DirichletSystem(materialize(sys_.region.model, comp))
    lim = heat_gs_limit(sub, comp[0], comp[-1])
    assert abs(lim.time_stepped - lim.value) <= 1e-8


@given(seed=seeds, n=st.integers(2, 60), a=st.floats(0.01, 3.0), b=st.floats(0.0, 1.0))
def test_resolvent_monotone_in_lambda(seed, n, a, b):
    sys_ = random_system(seed, n)
    lam0 = lambda_min(sys_).value
    lam, mu = lam0 - a - b, lam0 - a
    x = sys_.region.vertices[0]
    e = sys_.region.indicator(x)
    assert np.all(resolvent_apply(sys_, lam, e).values <= resolvent_apply(sys_, mu, e).values + 1e-12)
