"""Frame Normalizer Service.

Brings a jet-valued metric into normalized coordinates and builds the
g-orthonormal frame used by the realizer:

1. validate_normal_form - g(0) = diag(eps) and no degree-1 terms?
2. quadratic_normalize - quadratic coordinate change killing degree-1 terms
3. orthonormal_frame - signed Gram-Schmidt over jets, E_i(0) = d_i

Metrics whose value at 0 is not diag(eps) are rejected, never diagonalized:
rescaling to unit length would need square roots of rationals.
"""

from dataclasses import dataclass, field

import numpy as np
from sympy.polys.domains import QQ

from core.errors import DomainError, InvariantViolation, NormalFormError, ShapeError
from services.jetcalc import (
    Jet,
    inverse_unit,
    partial_derivative,
    sqrt_unit,
    substitute,
    to_rational,
    valuation,
    with_cap,
)
from services.tensor_algebra import BilinearForm, InnerProduct, index_range, signs

NORMAL_FORM_HINT = (
    "apply a constant linear change of coordinates so that g(0) = diag(eps) "
    "with the -1 entries first"
)


@dataclass(frozen=True, eq=True)
class MetricField:
    """Symmetric jet-valued metric g_ij with nondegenerate value at 0."""

    dim: int
    signature: tuple
    degree_cap: int
    entries: dict = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "signature", tuple(self.signature))
        for idx in index_range(self.dim, 2):
            if idx not in self.entries:
                raise ShapeError(f"metric entry {idx} missing")
            jet = self.entries[idx]
            if jet.dim != self.dim or jet.degree_cap != self.degree_cap:
                raise ShapeError(
                    f"metric entry {idx} has shape (m={jet.dim}, N={jet.degree_cap}), "
                    f"expected (m={self.dim}, N={self.degree_cap})"
                )
        for i, j in index_range(self.dim, 2):
            if self.entries[(i, j)] != self.entries[(j, i)]:
                raise DomainError(f"metric is not symmetric at ({i}, {j})")
        # validates nondegeneracy and signature
        self.value_at_origin()

    def __getitem__(self, idx):
        return self.entries[idx]

    @property
    def zero(self):
        return Jet.zero(self.dim, self.degree_cap)

    def value_at_origin(self):
        form = BilinearForm(
            self.dim, {idx: jet.constant_term for idx, jet in self.entries.items()}
        )
        return InnerProduct(form, self.signature)

    def with_cap(self, degree_cap):
        return MetricField(
            self.dim,
            self.signature,
            degree_cap,
            {idx: with_cap(jet, degree_cap) for idx, jet in self.entries.items()},
        )

    def as_form(self):
        return BilinearForm(self.dim, dict(self.entries), self.zero)


@dataclass(frozen=True, eq=True)
class FrameField:
    """Frame E_i = E_i^j d_j; entries[(i, j)] is E_i^j."""

    dim: int
    degree_cap: int
    entries: dict = field(repr=False)

    def __getitem__(self, idx):
        return self.entries[idx]

    def with_cap(self, degree_cap):
        return FrameField(
            self.dim,
            degree_cap,
            {idx: with_cap(jet, degree_cap) for idx, jet in self.entries.items()},
        )

    def deviation_valuation(self):
        """Lowest degree at which E_i^j differs from delta_i^j."""
        one = Jet.constant(self.dim, self.degree_cap, 1)
        zero = Jet.zero(self.dim, self.degree_cap)
        return min(
            valuation(jet - (one if i == j else zero))
            for (i, j), jet in self.entries.items()
        )


def constant_metric(signature, degree_cap, rows=None):
    """Constant metric; diag(eps) when rows is None."""
    eps = signs(signature)
    dim = len(eps)
    if rows is None:
        rows = [[eps[i] if i == j else 0 for j in range(dim)] for i in range(dim)]
    return MetricField(
        dim,
        signature,
        degree_cap,
        {
            (i, j): Jet.constant(dim, degree_cap, rows[i - 1][j - 1])
            for i, j in index_range(dim, 2)
        },
    )


def random_metric(seed, signature, degree_cap, degrees=(2,), denominator=4):
    """diag(eps) plus a random symmetric perturbation in the given degrees.

    Coefficients are k / denominator with |k| <= denominator, so they lie in
    [-1, 1]. Including degree 1 produces a metric that needs normalizing.
    """
    eps = signs(signature)
    dim = len(eps)
    rng = np.random.default_rng(seed)
    monomials = [
        exponents
        for exponents in exponents_up_to(dim, degree_cap)
        if sum(exponents) in degrees
    ]
    entries = {}
    for i, j in index_range(dim, 2):
        if j < i:
            continue
        terms = {(0,) * dim: eps[i - 1] if i == j else 0}
        draws = rng.integers(-denominator, denominator + 1, size=len(monomials))
        for exponents, k in zip(monomials, draws):
            if k:
                terms[exponents] = QQ(int(k), denominator)
        jet = Jet.from_terms(dim, degree_cap, terms)
        entries[(i, j)] = jet
        entries[(j, i)] = jet
    return MetricField(dim, signature, degree_cap, entries)


def exponents_up_to(dim, degree_cap):
    """Exponent tuples of total degree <= cap, graded then lexicographic."""
    found = []

    def build(prefix, remaining, slots):
        if slots == 0:
            found.append(tuple(prefix))
            return
        for e in range(remaining + 1):
            build(prefix + [e], remaining - e, slots - 1)

    build([], degree_cap, dim)
    return sorted(found, key=lambda e: (sum(e), e))


def _unit(dim, axis):
    return tuple(1 if a == axis else 0 for a in range(1, dim + 1))


def validate_normal_form(g):
    """Verdict {value_normalized, first_order_flat} for a metric field."""
    eps = signs(g.signature)
    value_normalized = all(
        g[(i, j)].constant_term == (QQ(eps[i - 1]) if i == j else QQ.zero)
        for i, j in index_range(g.dim, 2)
    )
    first_order_flat = all(
        not g[idx].coefficient(_unit(g.dim, k))
        for idx in index_range(g.dim, 2)
        for k in range(1, g.dim + 1)
    )
    return {
        "value_normalized": value_normalized,
        "first_order_flat": first_order_flat,
    }


def _christoffel_at_origin(g):
    """c^i_jk = 1/2 eps_i (d_j g_ik + d_k g_ij - d_i g_jk)(0)."""
    eps = signs(g.signature)
    dim = g.dim

    def d(a, b, axis):
        return g[(a, b)].coefficient(_unit(dim, axis))

    half = QQ(1, 2)
    return {
        (i, j, k): half * eps[i - 1] * (d(i, k, j) + d(i, j, k) - d(j, k, i))
        for i, j, k in index_range(dim, 3)
    }


def quadratic_normalize(g, verbose=True):
    """Remove the degree-1 part of g by x^i = y^i - 1/2 c^i_jk y^j y^k.

    Returns (coordinate_map, normalized metric); coordinate_map[i - 1] is
    the jet x^i(y). Metrics that are already first-order flat come back
    unchanged with the identity map.
    """
    verdict = validate_normal_form(g)
    if not verdict["value_normalized"]:
        raise NormalFormError(f"metric value at 0 is not diag(eps); {NORMAL_FORM_HINT}")

    dim, cap = g.dim, g.degree_cap
    identity = [Jet.variable(dim, cap, i) for i in range(1, dim + 1)]
    if verdict["first_order_flat"]:
        if verbose:
            print("[NORMALIZE] Metric already first-order flat; identity map", flush=True)
        return identity, g

    c = _christoffel_at_origin(g)
    half = QQ(1, 2)
    coordinate_map = []
    for i in range(1, dim + 1):
        image = identity[i - 1]
        for j, k in index_range(dim, 2):
            if c[(i, j, k)]:
                image = image - (identity[j - 1] * identity[k - 1]) * (half * c[(i, j, k)])
        coordinate_map.append(image)

    jacobian = {
        (a, b): partial_derivative(coordinate_map[a - 1], b)
        for a, b in index_range(dim, 2)
    }
    pulled = {idx: substitute(g[idx], coordinate_map) for idx in index_range(dim, 2)}

    entries = {}
    for a, b in index_range(dim, 2):
        if b < a:
            continue
        total = Jet.zero(dim, cap)
        for c_idx, d_idx in index_range(dim, 2):
            total = total + pulled[(c_idx, d_idx)] * jacobian[(c_idx, a)] * jacobian[(d_idx, b)]
        entries[(a, b)] = total
        entries[(b, a)] = total
    normalized = MetricField(dim, g.signature, cap, entries)

    if not validate_normal_form(normalized)["first_order_flat"]:
        raise InvariantViolation("quadratic_normalize left degree-1 terms behind")
    if verbose:
        print(
            f"[NORMALIZE] Applied quadratic coordinate change "
            f"({sum(1 for v in c.values() if v)} nonzero Christoffel values at 0)",
            flush=True,
        )
    return coordinate_map, normalized


def metric_pair(g, v, w):
    """g(v, w) for jet vectors v, w given as coordinate component lists."""
    dim = g.dim
    total = Jet.zero(dim, g.degree_cap)
    for a, b in index_range(dim, 2):
        if v[a - 1] and w[b - 1] and g[(a, b)]:
            total = total + g[(a, b)] * v[a - 1] * w[b - 1]
    return total


def orthonormal_frame(g, verbose=True):
    """Signed Gram-Schmidt frame with E_i(0) = d_i.

    u_i = d_i - sum_{j<i} eps_j g(d_i, E_j) E_j, then
    E_i = u_i / sqrt(eps_i g(u_i, u_i)). In normal form the radicand has
    constant term 1, so everything stays rational.
    """
    verdict = validate_normal_form(g)
    if not (verdict["value_normalized"] and verdict["first_order_flat"]):
        raise NormalFormError(
            f"orthonormal_frame needs a normalized metric (got {verdict}); "
            "run quadratic_normalize first"
        )
    dim, cap = g.dim, g.degree_cap
    eps = signs(g.signature)
    zero = Jet.zero(dim, cap)
    one = Jet.constant(dim, cap, 1)

    frame = []
    for i in range(1, dim + 1):
        coordinate = [one if a == i else zero for a in range(1, dim + 1)]
        u = list(coordinate)
        for j, previous in enumerate(frame, start=1):
            coeff = metric_pair(g, coordinate, previous) * eps[j - 1]
            if coeff:
                u = [u_a - coeff * p_a for u_a, p_a in zip(u, previous)]
        radicand = metric_pair(g, u, u) * eps[i - 1]
        if radicand.constant_term != QQ.one:
            raise InvariantViolation(
                f"Gram-Schmidt radicand for E_{i} has constant term "
                f"{radicand.constant_term}, expected 1"
            )
        inv_norm = inverse_unit(sqrt_unit(radicand))
        frame.append([u_a * inv_norm for u_a in u])

    result = FrameField(
        dim,
        cap,
        {(i, j): frame[i - 1][j - 1] for i, j in index_range(dim, 2)},
    )
    if verbose:
        print(
            f"[FRAME] Orthonormal frame built (deviation valuation "
            f"{result.deviation_valuation()})",
            flush=True,
        )
    return result


def frame_gram(frame, g):
    """sum_ab E_i^a E_j^b g_ab as a jet bilinear form (should be eps_i delta_ij)."""
    dim = g.dim
    rows = {
        i: [frame[(i, a)] for a in range(1, dim + 1)] for i in range(1, dim + 1)
    }
    return BilinearForm(
        dim,
        {(i, j): metric_pair(g, rows[i], rows[j]) for i, j in index_range(dim, 2)},
        Jet.zero(dim, g.degree_cap),
    )


def contract_with_frame(form, frame, degree_cap):
    """S(E_i, E_j) = sum_ab E_i^a E_j^b S_ab at the given cap."""
    dim = form.dim
    frame = frame.with_cap(degree_cap)
    zero = Jet.zero(dim, degree_cap)
    values = {idx: with_cap(form[idx], degree_cap) for idx in index_range(dim, 2)}
    entries = {}
    for i, j in index_range(dim, 2):
        total = zero
        for a, b in index_range(dim, 2):
            if values[(a, b)] and frame[(i, a)] and frame[(j, b)]:
                total = total + frame[(i, a)] * frame[(j, b)] * values[(a, b)]
        entries[(i, j)] = total
    return BilinearForm(dim, entries, zero)


def constant_jet_form(form, dim, degree_cap):
    """Lift a rational bilinear form to constant jets."""
    return BilinearForm(
        dim,
        {idx: Jet.constant(dim, degree_cap, to_rational(v)) for idx, v in form.entries.items()},
        Jet.zero(dim, degree_cap),
    )


def _jet_matmul(left, right, dim, zero):
    product = {}
    for i, j in index_range(dim, 2):
        total = zero
        for k in range(1, dim + 1):
            if left[(i, k)] and right[(k, j)]:
                total = total + left[(i, k)] * right[(k, j)]
        product[(i, j)] = total
    return product


def inverse_metric(g):
    """g^ij as jets: Neumann series around the constant inverse of g(0).

    With g = g0 + h and h(0) = 0, g^-1 = sum_k (-g0^-1 h)^k g0^-1; h^k has
    valuation >= k, so degree_cap terms are exact.
    """
    dim, cap = g.dim, g.degree_cap
    zero = Jet.zero(dim, cap)
    base = constant_jet_form(g.value_at_origin().inverse, dim, cap).entries
    tail = {idx: g[idx] - Jet.constant(dim, cap, g[idx].constant_term) for idx in g.entries}
    step = {idx: -value for idx, value in _jet_matmul(base, tail, dim, zero).items()}
    term = dict(base)
    total = dict(base)
    for _ in range(cap):
        term = _jet_matmul(step, term, dim, zero)
        total = {idx: total[idx] + term[idx] for idx in total}
    return BilinearForm(dim, total, zero)
