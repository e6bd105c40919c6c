import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgl import (
    DecisionRule,
    DirichletSystem,
    ExhaustionFamily,
    FormNotNonnegativeError,
    NoMinimalGreenError,
    apply_H,
    capacity_series,
    classify,
    default_family,
    green_series,
    ground_state,
    halfline,
    halfline_dirichlet,
    lattice,
    materialize,
    minimal_green,
    null_sequence,
    random_test_graph,
    solve,
    solve_green,
    tree,
    uniform_subcriticality_probe,
    weight_criticality,
    weight_nonneg_series,
)
from sgl.criticality import CAVEAT, tail_fit

from conftest import single_vertex

seeds = st.integers(0, 2**31 - 1)

N0 = default_family(halfline())
Z = default_family(lattice(1))
ND = default_family(halfline_dirichlet())


def exp_ground_state_model():
    # v(k) = 2^{-|k|} is H-harmonic: q = 1/2 off the origin, q(0) = -1
    return lattice(1).with_potential(lambda k: -1.0 if k == 0 else 0.5)


# -- series ------------------------------------------------------------------


@pytest.mark.parametrize(
    "fam, x, expected",
    [
        (N0, 0, [2, 3, 4, 5, 6]),
        (Z, 0, [1, 1.5, 2, 2.5, 3]),
        (ND, 1, [1 / 2, 2 / 3, 3 / 4, 4 / 5, 5 / 6]),
    ],
)
def test_green_series_closed_forms(fam, x, expected):
    s = green_series(fam, x, x, 5)
    assert s.levels == [1, 2, 3, 4, 5]
    np.testing.assert_allclose(s.values, expected, rtol=1e-12)
    assert s.is_monotone()


@pytest.mark.parametrize(
    "fam, x, formula",
    [(N0, 0, lambda n: 1 / (n + 1)), (Z, 0, lambda n: 2 / (n + 1)), (ND, 1, lambda n: (n + 1) / n)],
)
def test_capacity_series_closed_forms(fam, x, formula):
    s = capacity_series(fam, x, 30)
    np.testing.assert_allclose(s.values, [formula(n) for n in s.levels], rtol=1e-10)
    assert s.expected_monotonicity == "decreasing" and s.is_monotone()


def test_series_levels_override():
    s = green_series(N0, 0, 0, 100, levels=[10, 50, 100])
    np.testing.assert_allclose(s.values, [11, 51, 101], rtol=1e-12)


# -- classify ----------------------------------------------------------------


@pytest.mark.parametrize(
    "fam, x, N, verdict",
    [
        (N0, 0, 200, "Critical"),
        (Z, 0, 200, "Critical"),
        (ND, 1, 200, "Subcritical"),
        (default_family(lattice(3), ball="l1"), (0, 0, 0), 12, "Subcritical"),
        (default_family(tree(2)), (), 12, "Subcritical"),
        (default_family(exp_ground_state_model()), 0, 20, "Critical"),
        (default_family(single_vertex(q=2.0)), 0, 3, "Subcritical"),
    ],
)
def test_classify(fam, x, N, verdict):
    rep = classify(fam, x, N)
    assert rep.verdict == verdict
    assert rep.caveat == CAVEAT
    assert rep.series(f"cap_n({x})").is_monotone()
    json.loads(rep.to_json())


def test_classify_Z2_log_divergence():
    # G_n(0,0) ~ (log n)/π: the capacity shrinks slowly but the tail fit finds no convergence
    rep = classify(default_family(lattice(2)), (0, 0), 40)
    assert rep.verdict == "Critical"
    assert rep.details["tail_exponent"] == 0.0


def test_classify_rule_is_recorded():
    rule = DecisionRule(plateau_eps=1e-3)
    rep = classify(ND, 1, 50, rule=rule)
    assert rep.parameters["rule"]["plateau_eps"] == 1e-3


def test_classify_negative_form():
    model = halfline().with_potential(lambda n: -0.5 if n == 0 else 0.0)
    with pytest.raises(FormNotNonnegativeError):
        classify(default_family(model), 0, 10)


def test_tail_fit_exact_power():
    levels = list(range(1, 101))
    vals = [3.0 - 2.0 / (n + 1) for n in levels]
    p, lim = tail_fit(levels, vals)
    assert p == pytest.approx(1.0, rel=1e-6)
    assert lim == pytest.approx(3.0, rel=1e-9)


# -- ground states and null sequences ----------------------------------------


def test_ground_state_halfline():
    # window error about (10.5π/(2N+2))²/2: 1.3e-2 at N=100, 3.3e-3 at N=200
    rep = classify(N0, 0, 200)
    gs = ground_state(N0, 0, 200, report=rep)
    assert gs.label == "ground state"
    assert max(abs(gs.psi(k) - 1) for k in range(11)) <= 1e-2


def test_ground_state_Z():
    # eigenvector error on the window is about (10π/(2N+2))²/2: 1.2e-2 at N=100, 8.4e-3 at N=120
    gs = ground_state(Z, 0, 120)
    assert max(abs(gs.psi(k) - 1) for k in range(-10, 11)) <= 1e-2
    assert gs.label == "normalized Dirichlet eigenvector"


def test_ground_state_green_method_profile():
    gs = ground_state(N0, 0, 100, method="green")
    np.testing.assert_allclose([gs.psi(k) for k in range(11)], [(101 - k) / 101 for k in range(11)], rtol=1e-12)


def test_ground_state_constructed_potential():
    fam = default_family(exp_ground_state_model())
    gs = ground_state(fam, 0, 30)
    assert max(abs(gs.psi(k) - 2.0 ** -abs(k)) for k in range(-10, 11)) <= 1e-2


def test_ground_state_uniqueness_across_anchors():
    model = exp_ground_state_model()
    a = ground_state(default_family(model, anchor=0), 0, 20)
    b = ground_state(default_family(model, anchor=3), 3, 20)
    window = range(-5, 6)
    ratios = np.array([a.psi(k) / b.psi(k) for k in window])
    assert np.max(np.abs(ratios / ratios[0] - 1)) <= 1e-6


@pytest.mark.parametrize("fam, o, energy", [(N0, 0, lambda n: 1 / (n + 1)), (Z, 0, lambda n: 2 / (n + 1))])
def test_null_sequence_energies(fam, o, energy):
    seq = null_sequence(fam, o, 40)
    for n, (e, h) in enumerate(seq, start=1):
        assert e(o) == 1.0
        assert h == pytest.approx(energy(n), rel=1e-10)


def test_no_null_sequence_killed_halfline():
    seq = null_sequence(ND, 1, 200, levels=[50, 100, 200])
    assert seq[-1][1] == pytest.approx(201 / 200, rel=1e-10)


# -- minimal Green function --------------------------------------------------


def test_minimal_green_killed_halfline():
    res = minimal_green(ND, 1, 200)
    N = 200
    assert res.green(1) == pytest.approx(N / (N + 1), rel=1e-10)
    assert res.green(50) == pytest.approx((N + 1 - 50) / (N + 1), rel=1e-10)
    assert res.residual <= 1e-8


def test_minimal_green_tree():
    res = minimal_green(default_family(tree(2)), (), 12)
    assert res.residual <= 1e-8
    # radial solution u(n) = 2^{-n}: G(root, root) = 1, truncated value 1 - 2^{-(N+1)}
    assert res.green(()) == pytest.approx(1 - 2.0**-13, rel=1e-10)


def test_minimal_green_refuses_critical():
    with pytest.raises(NoMinimalGreenError):
        minimal_green(N0, 0, 50)


# -- weights -----------------------------------------------------------------


def test_weight_nonneg_series_hardy():
    s = weight_nonneg_series(ND, lambda n: 1 / (4 * n * n), 400, levels=[1, 10, 50, 100, 200, 400])
    assert s.is_monotone() and min(s.values) >= 1 - 1e-9
    assert s.meta["first_violation"] is None


def test_weight_nonneg_series_doubled_hardy():
    s = weight_nonneg_series(ND, lambda n: 1 / (2 * n * n), 400, levels=[1, 10, 50, 100, 200, 400])
    assert min(s.values) < 1
    assert s.meta["first_violation"] is not None


def test_weight_nonneg_series_on_critical_halfline():
    s = weight_nonneg_series(N0, lambda n: 1.0 if n == 0 else 0.0, 100, levels=[10, 50, 100])
    np.testing.assert_allclose(s.values, [1 / 11, 1 / 51, 1 / 101], rtol=1e-9)


def test_weight_criticality():
    one = lambda x: 1.0  # noqa: E731
    assert weight_criticality(N0, one, one, 200).verdict == "Null-critical"
    pos = weight_criticality(N0, lambda n: 2.0**-n, one, 200)
    assert pos.verdict == "Positive-critical"
    assert pos.series("S_n").last == pytest.approx(2.0, abs=1e-9)
    z = weight_criticality(Z, lambda k: 1 / (1 + k * k), one, 400)
    assert z.verdict == "Positive-critical"


# -- uniform subcriticality --------------------------------------------------


def test_probe_Z3_translates():
    fam = default_family(lattice(3), ball="l1")
    rng = np.random.default_rng(0)
    sample = [tuple(int(c) for c in rng.integers(-50, 50, 3)) for _ in range(20)]
    rep = uniform_subcriticality_probe(fam, sample, 8)
    assert rep.relative_spread <= 0.05 and rep.trend == "bounded"


def test_probe_killed_halfline_trend():
    rep = uniform_subcriticality_probe(ND, [1, 5, 10, 20], 200)
    N = 200
    np.testing.assert_allclose(rep.green_diagonal, [n * (N + 1 - n) / (N + 1) for n in (1, 5, 10, 20)], rtol=1e-10)
    assert rep.trend == "unbounded trend"


def test_probe_single_vertex():
    rep = uniform_subcriticality_probe(default_family(single_vertex(q=2.0)), [0], 2)
    assert rep.green_diagonal == [pytest.approx(0.5, rel=1e-14)] and rep.trend == "bounded"


# -- properties --------------------------------------------------------------


def random_family(seed, n):
    model = random_test_graph(n, seed)
    return ExhaustionFamily(model, 0)


@given(seed=seeds, n=st.integers(3, 200))
def test_series_monotone_and_reciprocal(seed, n):
    fam = random_family(seed, n)
    g = green_series(fam, 0, 0, 5, levels=[0, 1, 2, 3, 4, 5])
    cap = capacity_series(fam, 0, 5, levels=[0, 1, 2, 3, 4, 5])
    assert g.is_monotone() and cap.is_monotone()
    np.testing.assert_allclose(cap.values * g.values, 1.0, rtol=1e-10)


@given(seed=seeds, n=st.integers(3, 120))
def test_minimum_principle(seed, n):
    model = random_test_graph(n, seed)
    rng = np.random.default_rng(seed)
    inside = [v for v in model.vertices if rng.random() < 0.6] or [0]
    reg = materialize(model, inside)
    sys_ = DirichletSystem(reg)
    outside = [v for v in model.vertices if v not in reg.index]
    g = {y: float(rng.random()) * (rng.random() < 0.5) for y in outside}
    rhs = np.zeros(reg.size)
    for i, y, w in reg.boundary:
        rhs[i] += w * g[y]
    u = solve(sys_, rhs)
    scale = max(1.0, np.abs(u).max())
    assert np.all(u >= -1e-12 * scale)
    labels = sys_.components()
    for c in np.unique(labels):
        comp = labels == c
        if np.any(u[comp] > 1e-12 * scale):
            assert np.all(u[comp] > 0)


@given(seed=seeds, n=st.integers(3, 120))
def test_minimality_of_green(seed, n):
    # u = G_M(x,·) + G_M(z,·) on a bigger region M is a nonnegative supersolution with Hu >= 1_x
    fam = random_family(seed, n)
    rng = np.random.default_rng(seed)
    small = fam.region(1)
    big_level = 3
    big = DirichletSystem(fam.region(big_level))
    z = big.region.vertices[int(rng.integers(big.size))]
    u = solve_green(big, 0) + solve_green(big, z) * float(rng.random())
    for y in small.interior_vertices():
        assert apply_H(fam.model, u, y) >= (1.0 if y == 0 else 0.0) - 1e-10
    g = solve_green(DirichletSystem(small), 0)
    for y in small.vertices:
        assert u(y) >= g(y) - 1e-10 * max(1.0, g(0))


@given(seed=seeds, n=st.integers(3, 80))
def test_hardy_type_bound(seed, n):
    # if h - w >= 0 on every truncation then w(x) G_n(x, x) <= 1
    fam = random_family(seed, n)
    rng = np.random.default_rng(seed)
    raw = dict(zip(fam.model.vertices, rng.random(n)))
    s = weight_nonneg_series(fam, raw.get, 3, levels=[0, 1, 2, 3])
    scale = min(s.values)
    w = lambda x: raw[x] * scale  # noqa: E731
    for lvl in (0, 1, 2, 3):
        sys_ = DirichletSystem(fam.region(lvl))
        for x in sys_.region.vertices[:5]:
            assert w(x) * solve_green(sys_, x)(x) <= 1 + 1e-9
