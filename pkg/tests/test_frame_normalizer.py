import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.polys.domains import QQ

from core.errors import DomainError, NormalFormError, ShapeError
from services.frame_normalizer import (
    MetricField,
    constant_metric,
    contract_with_frame,
    exponents_up_to,
    frame_gram,
    inverse_metric,
    orthonormal_frame,
    quadratic_normalize,
    random_metric,
    validate_normal_form,
)
from services.jetcalc import Jet, mul
from services.tensor_algebra import index_range, signs

signatures = st.sampled_from([(0, 3), (1, 2), (2, 1), (0, 4), (1, 3)])
seeds = st.integers(min_value=0, max_value=10**6)


def diagonal_jets(signature, cap):
    eps = signs(signature)
    dim = len(eps)
    return {
        (i, j): Jet.constant(dim, cap, eps[i - 1] if i == j else 0)
        for i, j in index_range(dim, 2)
    }


def test_exponents_are_graded():
    found = exponents_up_to(2, 2)
    assert found == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    assert len(exponents_up_to(3, 3)) == 20


def test_metric_field_validation():
    g = constant_metric((0, 3), 2)
    missing = dict(g.entries)
    del missing[(1, 2)]
    with pytest.raises(ShapeError):
        MetricField(3, (0, 3), 2, missing)
    skewed = dict(g.entries)
    skewed[(1, 2)] = Jet.variable(3, 2, 1)
    with pytest.raises(DomainError, match="symmetric"):
        MetricField(3, (0, 3), 2, skewed)
    with pytest.raises(DomainError):
        constant_metric((0, 3), 2, rows=[[1, 0, 0], [0, 1, 0], [0, 0, 0]])


def test_validate_normal_form_examples():
    flat = constant_metric((1, 2), 3)
    assert validate_normal_form(flat) == {"value_normalized": True, "first_order_flat": True}
    swapped = constant_metric((1, 2), 3, rows=[[1, 0, 0], [0, -1, 0], [0, 0, 1]])
    assert not validate_normal_form(swapped)["value_normalized"]
    tilted = random_metric(3, (1, 2), 3, degrees=(1,))
    assert validate_normal_form(tilted) == {"value_normalized": True, "first_order_flat": False}


def test_quadratic_normalize_rejects_non_diagonal_value():
    g = constant_metric((1, 2), 2, rows=[[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    with pytest.raises(NormalFormError, match="diag"):
        quadratic_normalize(g)


def test_quadratic_normalize_is_identity_when_first_order_flat():
    g = random_metric(5, (0, 3), 3)
    coordinate_map, normalized = quadratic_normalize(g)
    assert normalized is g
    assert coordinate_map == [Jet.variable(3, 3, axis) for axis in (1, 2, 3)]


def test_quadratic_normalize_single_linear_term():
    # g = diag(1, 1, 1) + 2 x1 (dx2^2): c^2_12 = c^2_21 = 1, c^1_22 = -1
    cap = 2
    entries = diagonal_jets((0, 3), cap)
    entries[(2, 2)] = entries[(2, 2)] + Jet.variable(3, cap, 1) * 2
    g = MetricField(3, (0, 3), cap, entries)
    coordinate_map, normalized = quadratic_normalize(g)
    y1, y2, y3 = (Jet.variable(3, cap, axis) for axis in (1, 2, 3))
    assert coordinate_map[0] == y1 + y2 * y2 * QQ(1, 2)
    assert coordinate_map[1] == y2 - y1 * y2
    assert coordinate_map[2] == y3
    assert validate_normal_form(normalized) == {
        "value_normalized": True,
        "first_order_flat": True,
    }


@given(seeds, signatures)
@settings(max_examples=15, deadline=None)
def test_quadratic_normalize_removes_linear_terms(seed, signature):
    g = random_metric(seed, signature, 3, degrees=(1, 2))
    coordinate_map, normalized = quadratic_normalize(g)
    assert validate_normal_form(normalized) == {
        "value_normalized": True,
        "first_order_flat": True,
    }
    assert normalized.degree_cap == g.degree_cap
    for axis, image in enumerate(coordinate_map, start=1):
        assert image.coefficient(tuple(1 if a == axis else 0 for a in range(1, g.dim + 1))) == 1
        assert all(sum(exponents) == 1 or sum(exponents) == 2 for exponents in image.terms)


def test_orthonormal_frame_of_constant_metric_is_coordinate_frame():
    g = constant_metric((1, 2), 3)
    frame = orthonormal_frame(g)
    assert frame.deviation_valuation() == float("inf")
    for i, j in index_range(3, 2):
        assert frame[(i, j)] == Jet.constant(3, 3, 1 if i == j else 0)


def test_orthonormal_frame_needs_normal_form():
    with pytest.raises(NormalFormError):
        orthonormal_frame(random_metric(2, (0, 3), 2, degrees=(1,)))


@given(seeds, signatures)
@settings(max_examples=15, deadline=None)
def test_orthonormal_frame_is_orthonormal(seed, signature):
    _, g = quadratic_normalize(random_metric(seed, signature, 3, degrees=(1, 2)))
    frame = orthonormal_frame(g)
    expected = diagonal_jets(signature, g.degree_cap)
    gram = frame_gram(frame, g)
    assert gram.entries == expected
    assert contract_with_frame(g.as_form(), frame, g.degree_cap).entries == expected
    assert frame.deviation_valuation() >= 2


@given(seeds, signatures)
@settings(max_examples=15, deadline=None)
def test_inverse_metric(seed, signature):
    g = random_metric(seed, signature, 3, degrees=(1, 2, 3))
    inverse = inverse_metric(g)
    dim = g.dim
    for i, j in index_range(dim, 2):
        total = Jet.zero(dim, g.degree_cap)
        for k in range(1, dim + 1):
            total = total + mul(g[(i, k)], inverse[(k, j)])
        assert total == Jet.constant(dim, g.degree_cap, 1 if i == j else 0)


def test_random_metric_is_deterministic():
    assert random_metric(9, (1, 3), 3) == random_metric(9, (1, 3), 3)
    g = random_metric(9, (1, 3), 3, degrees=(2, 3))
    assert all(
        sum(exponents) in (0, 2, 3) for jet in g.entries.values() for exponents in jet.terms
    )
