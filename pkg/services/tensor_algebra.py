"""Tensor algebra for generalized algebraic curvature operators.

Tensors are dense dicts keyed by 1-based index tuples; the contravariant
slot of a (3,1) tensor is stored last, so entries[(i, j, k, l)] is
A_{ijk}^l. Entries are either QQ rationals (constant tensors) or Jets
(fields). Contractions are written once and work for both scalar types.

Ricci decomposition follows the GL(V)-equivariant splitting

    A = P(A) + sigma_s(rho_s(A)) + sigma_a(rho_a(A))

with
    sigma_s(psi)_{ijk}^l = (psi_jk delta_i^l - psi_ik delta_j^l) / (m - 1)
    sigma_a(psi)_{ijk}^l = -(2 psi_ij delta_k^l + psi_ik delta_j^l
                             - psi_jk delta_i^l) / (m + 1)

Both sections are checked against rho . sigma = id and the cyclic identity
in tests/test_tensor_algebra.py, where the coefficients are re-derived.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from sympy import Matrix
from sympy.polys.domains import QQ

from core.errors import DomainError, ShapeError
from services.jetcalc import to_rational

MIN_CURVATURE_DIM = 3


def index_range(dim, rank):
    """All 1-based index tuples of a rank-`rank` tensor on R^dim."""
    return product(range(1, dim + 1), repeat=rank)


def _delta(a, b):
    return QQ.one if a == b else QQ.zero


def _sum(values, zero):
    total = zero
    for value in values:
        total = total + value
    return total


def symmetry_defects(dim, entries):
    """First violations of antisymmetry and of the cyclic identity.

    Returns (antisymmetry_index or None, cyclic_index or None). Works for
    rational and jet entries alike.
    """
    antisym = None
    cyclic = None
    for i, j, k, l in index_range(dim, 4):
        value = entries[(i, j, k, l)]
        if antisym is None and value + entries[(j, i, k, l)]:
            antisym = (i, j, k, l)
        if cyclic is None and (
            value + entries[(j, k, i, l)] + entries[(k, i, j, l)]
        ):
            cyclic = (i, j, k, l)
        if antisym is not None and cyclic is not None:
            break
    return antisym, cyclic


@dataclass(frozen=True, eq=True)
class AlgebraicCurvatureOperator:
    """Constant (3,1) tensor A_{ijk}^l satisfying both curvature identities.

    Construction validates: antisymmetry in the first two slots and the
    cyclic (first Bianchi) identity. Missing entries are zero.
    """

    dim: int
    entries: dict = field(repr=False)

    def __post_init__(self):
        if self.dim < MIN_CURVATURE_DIM:
            raise DomainError(
                f"curvature operators need m >= {MIN_CURVATURE_DIM}, got {self.dim}"
            )
        dense = {
            idx: to_rational(self.entries.get(idx, 0))
            for idx in index_range(self.dim, 4)
        }
        object.__setattr__(self, "entries", dense)
        antisym, cyclic = symmetry_defects(self.dim, dense)
        if antisym is not None:
            raise DomainError(f"A violates A_ijk^l = -A_jik^l at {antisym}")
        if cyclic is not None:
            raise DomainError(f"A violates the cyclic identity at {cyclic}")

    @property
    def zero(self):
        return QQ.zero

    def __getitem__(self, idx):
        return self.entries[idx]

    @classmethod
    def zero_operator(cls, dim):
        return cls(dim, {})

    def __add__(self, other):
        return AlgebraicCurvatureOperator(
            self.dim, {k: v + other.entries[k] for k, v in self.entries.items()}
        )

    def __sub__(self, other):
        return AlgebraicCurvatureOperator(
            self.dim, {k: v - other.entries[k] for k, v in self.entries.items()}
        )

    def scaled(self, factor):
        factor = to_rational(factor)
        return AlgebraicCurvatureOperator(
            self.dim, {k: v * factor for k, v in self.entries.items()}
        )

    def is_zero(self):
        return not any(self.entries.values())


@dataclass(frozen=True, eq=True)
class BilinearForm:
    """psi_{ij} with rational or jet entries (zero gives the scalar type)."""

    dim: int
    entries: dict = field(repr=False)
    zero: object = QQ.zero

    def __getitem__(self, idx):
        return self.entries[idx]

    @classmethod
    def from_rows(cls, rows):
        dim = len(rows)
        return cls(
            dim,
            {
                (i, j): to_rational(rows[i - 1][j - 1])
                for i, j in index_range(dim, 2)
            },
        )

    @classmethod
    def zero_form(cls, dim, zero=QQ.zero):
        return cls(dim, {idx: zero for idx in index_range(dim, 2)}, zero)

    def transpose(self):
        return BilinearForm(
            self.dim, {(i, j): self.entries[(j, i)] for i, j in self.entries}, self.zero
        )

    def __add__(self, other):
        return BilinearForm(
            self.dim, {k: v + other.entries[k] for k, v in self.entries.items()}, self.zero
        )

    def __sub__(self, other):
        return BilinearForm(
            self.dim, {k: v - other.entries[k] for k, v in self.entries.items()}, self.zero
        )

    def scaled(self, factor):
        factor = to_rational(factor)
        return BilinearForm(
            self.dim, {k: v * factor for k, v in self.entries.items()}, self.zero
        )

    def is_zero(self):
        return not any(bool(v) for v in self.entries.values())

    def is_symmetric(self):
        return all(
            not (self.entries[(i, j)] - self.entries[(j, i)])
            for i, j in index_range(self.dim, 2)
        )

    def is_antisymmetric(self):
        return all(
            not (self.entries[(i, j)] + self.entries[(j, i)])
            for i, j in index_range(self.dim, 2)
        )

    def rows(self):
        return [
            [self.entries[(i, j)] for j in range(1, self.dim + 1)]
            for i in range(1, self.dim + 1)
        ]


class InnerProduct:
    """Nondegenerate symmetric inner product g_ij with cached inverse g^ij.

    Signature (p, q) counts negative and positive directions and is checked
    exactly against the characteristic polynomial (Descartes' rule is exact
    for a real symmetric matrix, whose eigenvalues are all real).
    """

    def __init__(self, form, signature):
        if not form.is_symmetric():
            raise DomainError("inner product must be symmetric")
        p, q = signature
        if p < 0 or q < 0 or p + q != form.dim:
            raise DomainError(f"signature {signature} does not fit dimension {form.dim}")
        matrix = Matrix(form.dim, form.dim, lambda a, b: QQ.to_sympy(form[(a + 1, b + 1)]))
        if matrix.det() == 0:
            raise DomainError("inner product is degenerate")
        found = _inertia(matrix)
        if found != (p, q):
            raise DomainError(f"inner product has signature {found}, declared {(p, q)}")
        inverse = matrix.inv()
        self.dim = form.dim
        self.signature = (p, q)
        self.form = form
        self.inverse = BilinearForm(
            form.dim,
            {
                (a, b): QQ.from_sympy(inverse[a - 1, b - 1])
                for a, b in index_range(form.dim, 2)
            },
        )

    @classmethod
    def normalized(cls, signature):
        """diag(eps) with eps_i = -1 for i <= p, +1 otherwise."""
        eps = signs(signature)
        dim = len(eps)
        form = BilinearForm(
            dim,
            {(i, j): QQ(eps[i - 1]) if i == j else QQ.zero for i, j in index_range(dim, 2)},
        )
        return cls(form, signature)

    def __getitem__(self, idx):
        return self.form[idx]

    def is_normalized(self):
        eps = signs(self.signature)
        return all(
            self.form[(i, j)] == (QQ(eps[i - 1]) if i == j else QQ.zero)
            for i, j in index_range(self.dim, 2)
        )


def signs(signature):
    """eps_i per axis: timelike (-1) first, then spacelike (+1)."""
    p, q = signature
    return [-1] * p + [1] * q


def _inertia(matrix):
    dim = matrix.shape[0]
    coeffs = [c for c in matrix.charpoly().all_coeffs()]

    def sign_changes(values):
        nonzero = [v for v in values if v != 0]
        return sum(1 for a, b in zip(nonzero, nonzero[1:]) if (a < 0) != (b < 0))

    positive = sign_changes(coeffs)
    mirrored = [c * (-1) ** (dim - power) for power, c in enumerate(coeffs)]
    negative = sign_changes(mirrored)
    return negative, positive


def _check_dims(*objects):
    dims = {obj.dim for obj in objects}
    if len(dims) != 1:
        raise ShapeError(f"dimension mismatch: {sorted(dims)}")


def project_to_aco(dim, raw):
    """Project a raw (3,1) tensor onto the curvature-operator symmetry class.

    Antisymmetrize in the first two slots, then remove a third of the
    cyclic sum. Fixes curvature operators pointwise and is idempotent.
    """
    if dim < MIN_CURVATURE_DIM:
        raise DomainError(f"curvature operators need m >= {MIN_CURVATURE_DIM}, got {dim}")
    half = QQ(1, 2)
    third = QQ(1, 3)
    raw = {idx: to_rational(raw.get(idx, 0)) for idx in index_range(dim, 4)}
    skew = {
        (i, j, k, l): (raw[(i, j, k, l)] - raw[(j, i, k, l)]) * half
        for i, j, k, l in index_range(dim, 4)
    }
    projected = {
        (i, j, k, l): skew[(i, j, k, l)]
        - third * (skew[(i, j, k, l)] + skew[(j, k, i, l)] + skew[(k, i, j, l)])
        for i, j, k, l in index_range(dim, 4)
    }
    return AlgebraicCurvatureOperator(dim, projected)


def ricci(curvature):
    """rho_jk = sum_i R_{ijk}^i, for constant operators and jet fields."""
    dim = curvature.dim
    zero = curvature.zero
    entries = curvature.entries
    return BilinearForm(
        dim,
        {
            (j, k): _sum((entries[(i, j, k, i)] for i in range(1, dim + 1)), zero)
            for j, k in index_range(dim, 2)
        },
        zero,
    )


def ricci_split(psi):
    """(antisymmetric part, symmetric part) of a bilinear form."""
    half = QQ(1, 2)
    transposed = psi.transpose()
    return (psi - transposed).scaled(half), (psi + transposed).scaled(half)


def scalar_curvature(operator, inner):
    """tau = g^ij rho_ij."""
    _check_dims(operator, inner)
    return contract_with_inverse(ricci(operator), inner.inverse)


def contract_with_inverse(form, inverse):
    return _sum(
        (inverse[idx] * form[idx] for idx in index_range(form.dim, 2)), form.zero
    )


def trace_free_ricci(operator, inner):
    """rho_0 = rho_s - (tau / m) g."""
    _check_dims(operator, inner)
    _, symmetric = ricci_split(ricci(operator))
    tau = scalar_curvature(operator, inner)
    return symmetric - inner.form.scaled(tau * QQ(1, operator.dim))


def sigma_s(psi):
    """Section of rho on symmetric forms."""
    if not psi.is_symmetric():
        raise DomainError("sigma_s needs a symmetric form")
    dim = psi.dim
    factor = QQ(1, dim - 1)
    return AlgebraicCurvatureOperator(
        dim,
        {
            (i, j, k, l): (psi[(j, k)] * _delta(i, l) - psi[(i, k)] * _delta(j, l)) * factor
            for i, j, k, l in index_range(dim, 4)
        },
    )


def sigma_a(psi):
    """Section of rho on antisymmetric forms."""
    if not psi.is_antisymmetric():
        raise DomainError("sigma_a needs an antisymmetric form")
    dim = psi.dim
    factor = QQ(-1, dim + 1)
    return AlgebraicCurvatureOperator(
        dim,
        {
            (i, j, k, l): (
                2 * psi[(i, j)] * _delta(k, l)
                + psi[(i, k)] * _delta(j, l)
                - psi[(j, k)] * _delta(i, l)
            )
            * factor
            for i, j, k, l in index_range(dim, 4)
        },
    )


def weyl_projective(operator):
    """Component of A in ker(rho)."""
    antisymmetric, symmetric = ricci_split(ricci(operator))
    return operator - sigma_s(symmetric) - sigma_a(antisymmetric)


def classify(operator, inner):
    """Exact classification flags plus the O(V) pattern of rho(A).

    The pattern names which of the three orthogonal Ricci summands
    (Lambda^2, trace-free S^2, scalar line) are present.
    """
    _check_dims(operator, inner)
    antisymmetric, symmetric = ricci_split(ricci(operator))
    tau = scalar_curvature(operator, inner)
    trace_free = trace_free_ricci(operator, inner)
    return {
        "projectively_flat": weyl_projective(operator).is_zero(),
        "ricci_symmetric": antisymmetric.is_zero(),
        "ricci_antisymmetric": symmetric.is_zero(),
        "ricci_traceless": not tau,
        "einstein": trace_free.is_zero(),
        "ricci_pattern": {
            "antisymmetric": not antisymmetric.is_zero(),
            "trace_free_symmetric": not trace_free.is_zero(),
            "scalar": bool(tau),
        },
    }


def random_aco(seed, dim, bound=3):
    """Deterministic random operator: integer raw tensor in [-bound, bound],
    projected onto the curvature symmetry class."""
    if dim < MIN_CURVATURE_DIM:
        raise DomainError(f"curvature operators need m >= {MIN_CURVATURE_DIM}, got {dim}")
    rng = np.random.default_rng(seed)
    values = rng.integers(-bound, bound + 1, size=dim**4)
    raw = {
        idx: int(value) for idx, value in zip(index_range(dim, 4), values)
    }
    return project_to_aco(dim, raw)
