import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgl import (
    DomainError,
    ExhaustionFamily,
    UnsupportedPresentationError,
    GraphModel,
    default_family,
    from_edges,
    from_weights,
    halfline,
    halfline_dirichlet,
    lattice,
    materialize,
    region,
    tree,
    validate,
    weighted_degree,
)


@pytest.mark.parametrize(
    "model, x, expected",
    [
        (halfline(), 0, 1.0),
        (lattice(1), 0, 2.0),
        (lattice(3), (0, 0, 0), 6.0),
        (tree(3), (), 3.0),
        (tree(3), (0, 2), 4.0),
    ],
)
def test_weighted_degree(model, x, expected):
    assert weighted_degree(model, x) == expected


def test_weighted_degree_outside_universe():
    with pytest.raises(DomainError):
        weighted_degree(halfline(), -1)


def test_validate_two_vertex_passes():
    rep = validate(from_weights({(1, 2): 1.0, (2, 1): 1.0}), [1, 2])
    assert rep.ok and rep.connected
    assert rep.summary() == "pass, connected"


def test_validate_flags_asymmetry():
    rep = validate(from_weights({(1, 2): 1.0, (2, 1): 2.0}), [1, 2])
    assert not rep.ok
    assert len(rep.symmetry_violations) == 1


def test_validate_two_components():
    model = from_edges([1, 2, 3, 4], [(1, 2, 1.0), (3, 4, 1.0)])
    rep = validate(model, [1, 2, 3, 4])
    assert rep.ok and not rep.connected
    assert rep.components == 2
    assert "not connected" in rep.summary()


def test_validate_collects_diagonal_and_measure_defects():
    model = from_weights({(1, 1): 1.0, (1, 2): 1.0, (2, 1): 1.0}, m={2: 0.0})
    rep = validate(model, [1, 2, 7])
    assert rep.diagonal_violations and rep.measure_violations
    assert rep.unknown_vertices == [7]


def test_materialize_rejects_asymmetry():
    with pytest.raises(DomainError, match="asymmetric"):
        materialize(from_weights({(1, 2): 1.0, (2, 1): 2.0}), [1, 2])


def test_z_ball_radius_two():
    fam = default_family(lattice(1))
    reg = region(fam, 2)
    assert reg.vertices == (-2, -1, 0, 1, 2)
    assert sorted((reg.vertices[i], y) for i, y, _ in reg.boundary) == [(-2, -3), (2, 3)]


def test_halfline_level_three():
    reg = region(default_family(halfline()), 3)
    assert reg.vertices == (0, 1, 2, 3)
    assert [(reg.vertices[i], y) for i, y, _ in reg.boundary] == [(3, 4)]


def test_z3_l1_unit_ball_boundary_count():
    # enumeration oracle: every edge from the ball to its complement
    reg = region(default_family(lattice(3), ball="l1"), 1)
    ball = {v for v in itertools.product(range(-1, 2), repeat=3) if sum(map(abs, v)) <= 1}
    exits = 0
    for v in ball:
        for axis, s in itertools.product(range(3), (-1, 1)):
            w = list(v)
            w[axis] += s
            exits += tuple(w) not in ball
    assert reg.size == 7
    assert len(reg.boundary) == exits == 30


def test_dirichlet_halfline_encodes_killed_edge():
    model = halfline_dirichlet()
    assert model.q(1) == 1.0 and model.q(2) == 0.0
    reg = region(default_family(model), 4)
    assert reg.vertices == (1, 2, 3, 4)


def test_linf_box():
    fam = ExhaustionFamily(lattice(2), (0, 0), ball="linf")
    assert fam.region(1).size == 9
    with pytest.raises(DomainError):
        ExhaustionFamily(halfline(), 0, ball="linf")


def test_tree_depth_ball():
    fam = default_family(tree(2))
    assert fam.anchor == ()
    assert [fam.region(n).size for n in range(4)] == [1, 3, 7, 15]


def test_degree_cap():
    model = GraphModel(lambda x: ((k, 1.0) for k in itertools.count(1)), max_degree=10)
    with pytest.raises(UnsupportedPresentationError):
        model.neighbors(0)


def test_canonical_ordering_is_insertion_independent():
    a = materialize(lattice(2), [(1, 0), (0, 0), (-1, 0)])
    b = materialize(lattice(2), [(-1, 0), (1, 0), (0, 0)])
    assert a.vertices == b.vertices == ((-1, 0), (0, 0), (1, 0))


def test_derived_model_keeps_identity():
    base = lattice(3)
    shifted = base.with_potential(1.0)
    assert shifted.kind == "lattice" and shifted.lattice_dim == 3
    assert base.potential_is_zero and not shifted.potential_is_zero


FAMILIES = [
    default_family(halfline()),
    default_family(halfline_dirichlet()),
    default_family(lattice(1)),
    default_family(lattice(2)),
    default_family(lattice(3), ball="l1"),
    ExhaustionFamily(lattice(2), (0, 0), ball="linf"),
    default_family(tree(3)),
]


@pytest.mark.parametrize("fam", FAMILIES, ids=repr)
@pytest.mark.parametrize("n", [0, 1, 3])
def test_exhaustion_nesting_and_boundary(fam, n):
    inner, outer = fam.region(n), fam.region(n + 1)
    assert set(inner.vertices) <= set(outer.vertices)
    # boundary edges landing in the next level become induced edges there
    induced = {
        frozenset((outer.vertices[i], outer.vertices[j]))
        for i, j in zip(outer.edges_i.tolist(), outer.edges_j.tolist())
    }
    for i, y, _ in inner.boundary:
        if y in outer.index:
            assert frozenset((inner.vertices[i], y)) in induced


@pytest.mark.parametrize("fam", FAMILIES, ids=repr)
def test_degree_splits_into_induced_and_boundary(fam):
    reg = fam.region(3)
    acc = np.zeros(reg.size)
    np.add.at(acc, reg.edges_i, reg.edges_b)
    np.add.at(acc, reg.edges_j, reg.edges_b)
    np.add.at(acc, reg.boundary_i, reg.boundary_b)
    expected = [weighted_degree(fam.model, v) for v in reg.vertices]
    np.testing.assert_allclose(acc, expected, rtol=1e-14)
    np.testing.assert_allclose(reg.degree, expected, rtol=1e-14)


@given(
    n=st.integers(2, 12),
    edges=st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11), st.floats(0.01, 5.0)), max_size=30),
)
def test_explicit_graph_regions_are_symmetric(n, edges):
    # one entry per unordered pair; a listed reverse pair would be its own (possibly different) weight
    uniq = {}
    for u, v, w in edges:
        if u % n != v % n:
            uniq.setdefault(frozenset((u % n, v % n)), (u % n, v % n, w))
    edges = list(uniq.values())
    model = from_edges(range(n), edges)
    reg = materialize(model, range(n))
    for i, j, w in zip(reg.edges_i, reg.edges_j, reg.edges_b):
        x, y = reg.vertices[i], reg.vertices[j]
        assert model.b(x, y) == model.b(y, x) == w
    assert not reg.boundary
