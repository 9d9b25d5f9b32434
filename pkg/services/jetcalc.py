"""Jet arithmetic: truncated multivariate polynomials over exact rationals.

A jet is a polynomial in x1..xm whose monomials of total degree above a
fixed cap have been discarded. Every field quantity of the engine (metric,
frame, Christoffel symbol, curvature, Theta) is a tensor of jets.

Storage is a sparse sympy polynomial over QQ, so coefficients are exact
and zero coefficients are never stored. Truncation is always by total
degree, and two jets only combine when both dim and degree cap agree.

Exponent tuples and axis numbers follow the geometry: axes are 1-based
(x1 is axis 1), exponents are plain tuples of length m.
"""

import math
from fractions import Fraction
from functools import lru_cache

from sympy import Rational
from sympy.polys.domains import QQ
from sympy.polys.monomials import monomial_mul
from sympy.polys.rings import ring

from core.errors import DomainError, ShapeError


@lru_cache(maxsize=None)
def jet_ring(dim):
    """Polynomial ring QQ[x1, ..., xm] shared by every jet of this dimension."""
    names = ",".join(f"x{i}" for i in range(1, dim + 1))
    return ring(names, QQ)[0]


def to_rational(value):
    """Convert int, Fraction, sympy Rational or "p/q" string to a QQ element."""
    if isinstance(value, QQ.dtype):
        return value
    if isinstance(value, str):
        return QQ.from_sympy(Rational(value))
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, Rational):
        return QQ.from_sympy(value)
    return QQ.convert(value)


def format_rational(value):
    """Exact string form: "p/q", or "p" for integers."""
    exact = QQ.to_sympy(to_rational(value))
    if exact.q == 1:
        return str(exact.p)
    return f"{exact.p}/{exact.q}"


def _degree(exponents):
    return sum(exponents)


class Jet:
    """Immutable truncated polynomial.

    Attributes:
        dim: number of variables m
        degree_cap: truncation order N; no stored monomial exceeds it
    """

    __slots__ = ("dim", "degree_cap", "_poly")

    def __init__(self, dim, degree_cap, poly):
        self.dim = dim
        self.degree_cap = degree_cap
        self._poly = poly

    @classmethod
    def zero(cls, dim, degree_cap):
        _check_shape_args(dim, degree_cap)
        return cls(dim, degree_cap, jet_ring(dim).zero)

    @classmethod
    def constant(cls, dim, degree_cap, value):
        _check_shape_args(dim, degree_cap)
        return cls(dim, degree_cap, jet_ring(dim).ground_new(to_rational(value)))

    @classmethod
    def variable(cls, dim, degree_cap, axis):
        """The coordinate function x_axis (truncated away when the cap is 0)."""
        _check_axis(dim, axis)
        exponents = tuple(1 if i == axis else 0 for i in range(1, dim + 1))
        return cls.from_terms(dim, degree_cap, {exponents: 1}, truncate=True)

    @classmethod
    def from_terms(cls, dim, degree_cap, terms, truncate=False):
        """Build a jet from {exponents: coefficient}.

        Monomials above the cap raise ShapeError unless truncate is set,
        in which case they are dropped.
        """
        _check_shape_args(dim, degree_cap)
        clean = {}
        for exponents, coeff in terms.items():
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != dim:
                raise ShapeError(
                    f"exponent {exponents} has length {len(exponents)}, expected {dim}"
                )
            if any(e < 0 for e in exponents):
                raise DomainError(f"negative exponent in {exponents}")
            if _degree(exponents) > degree_cap:
                if truncate:
                    continue
                raise ShapeError(
                    f"monomial {exponents} exceeds degree cap {degree_cap}"
                )
            clean[exponents] = to_rational(coeff)
        return cls(dim, degree_cap, jet_ring(dim).from_dict(clean))

    def zero_like(self):
        return Jet.zero(self.dim, self.degree_cap)

    def one_like(self):
        return Jet.constant(self.dim, self.degree_cap, 1)

    @property
    def terms(self):
        """Copy of the sparse term map {exponents: coefficient}."""
        return dict(self._poly.items())

    def sorted_terms(self):
        """Terms ordered by total degree, then exponent tuple."""
        return sorted(self._poly.items(), key=lambda item: (_degree(item[0]), item[0]))

    @property
    def constant_term(self):
        return self._poly.get((0,) * self.dim, QQ.zero)

    def coefficient(self, exponents):
        return self._poly.get(tuple(exponents), QQ.zero)

    def is_zero(self):
        return not self._poly

    def __bool__(self):
        return bool(self._poly)

    def __add__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return add(self, other)

    def __sub__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return add(self, -other)

    def __neg__(self):
        return Jet(self.dim, self.degree_cap, -self._poly)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return mul(self, other)
        return scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.degree_cap == other.degree_cap
            and self._poly == other._poly
        )

    def __hash__(self):
        return hash((self.dim, self.degree_cap, frozenset(self._poly.items())))

    def __repr__(self):
        if not self._poly:
            body = "0"
        else:
            body = " + ".join(
                f"{format_rational(c)}*x^{e}" for e, c in self.sorted_terms()
            )
        return f"Jet(m={self.dim}, N={self.degree_cap}: {body})"


def _check_shape_args(dim, degree_cap):
    if dim < 1:
        raise ShapeError(f"jet dimension must be positive, got {dim}")
    if degree_cap < 0:
        raise ShapeError(f"degree cap must be non-negative, got {degree_cap}")


def _check_axis(dim, axis):
    if not 1 <= axis <= dim:
        raise DomainError(f"axis {axis} out of range 1..{dim}")


def _require_same_shape(a, b, op):
    if a.dim != b.dim or a.degree_cap != b.degree_cap:
        raise ShapeError(
            f"{op}: shape mismatch (m={a.dim}, N={a.degree_cap}) "
            f"vs (m={b.dim}, N={b.degree_cap})"
        )


def add(a, b):
    """Coefficientwise sum."""
    _require_same_shape(a, b, "add")
    return Jet(a.dim, a.degree_cap, a._poly + b._poly)


def scale(a, factor):
    """Multiply every coefficient by a rational."""
    factor = to_rational(factor)
    return Jet(a.dim, a.degree_cap, a._poly.mul_ground(factor))


def mul(a, b):
    """Cauchy product, discarding monomials of total degree above the cap."""
    _require_same_shape(a, b, "mul")
    cap = a.degree_cap
    product = jet_ring(a.dim).zero
    if not a._poly or not b._poly:
        return Jet(a.dim, cap, product)

    right = sorted(
        ((_degree(e), e, c) for e, c in b._poly.items()), key=lambda t: t[0]
    )
    for left_exp, left_coeff in a._poly.items():
        room = cap - _degree(left_exp)
        for right_deg, right_exp, right_coeff in right:
            if right_deg > room:
                break
            exponents = monomial_mul(left_exp, right_exp)
            coeff = product.get(exponents, QQ.zero) + left_coeff * right_coeff
            if coeff:
                product[exponents] = coeff
            else:
                del product[exponents]
    return Jet(a.dim, cap, product)


def power(a, exponent):
    result = a.one_like()
    for _ in range(exponent):
        result = mul(result, a)
    return result


def partial_derivative(a, axis):
    """Formal partial derivative along a 1-based axis; the cap is kept.

    A jet differentiated at cap N is only faithful through degree N - 1.
    """
    _check_axis(a.dim, axis)
    poly = a._poly.diff(a._poly.ring.gens[axis - 1])
    return Jet(a.dim, a.degree_cap, poly)


def integrate_axis(a, axis):
    """Antiderivative along an axis vanishing on the hyperplane x_axis = 0.

    Each x^alpha becomes x^alpha * x_axis / (alpha_axis + 1); monomials that
    would exceed the cap are dropped.
    """
    _check_axis(a.dim, axis)
    slot = axis - 1
    integrated = {}
    for exponents, coeff in a._poly.items():
        if _degree(exponents) + 1 > a.degree_cap:
            continue
        raised = list(exponents)
        raised[slot] += 1
        integrated[tuple(raised)] = coeff * QQ(1, exponents[slot] + 1)
    return Jet(a.dim, a.degree_cap, jet_ring(a.dim).from_dict(integrated))


def evaluate(a, point):
    """Exact value of the polynomial at a rational point."""
    if len(point) != a.dim:
        raise ShapeError(f"point has {len(point)} coordinates, expected {a.dim}")
    values = [to_rational(v) for v in point]
    return a._poly(*values)


def valuation(a):
    """Lowest total degree of a stored monomial; math.inf for the zero jet."""
    if not a._poly:
        return math.inf
    return min(_degree(e) for e in a._poly)


def with_cap(a, degree_cap):
    """Reinterpret at another cap, dropping monomials above it.

    Raising the cap keeps the polynomial as is; callers do that only when
    the extra precision is genuinely known (e.g. before integrating).
    """
    kept = {e: c for e, c in a._poly.items() if _degree(e) <= degree_cap}
    return Jet(a.dim, degree_cap, jet_ring(a.dim).from_dict(kept))


def homogeneous_part(a, degree):
    kept = {e: c for e, c in a._poly.items() if _degree(e) == degree}
    return Jet(a.dim, a.degree_cap, jet_ring(a.dim).from_dict(kept))


def sqrt_unit(a):
    """Square root of a jet with constant term 1.

    Solves (1 + t)^2 = a by t <- (a - 1 - t^2) / 2; every pass fixes one
    more degree, so degree_cap passes are exact.
    """
    if a.constant_term != QQ.one:
        raise DomainError(
            f"sqrt_unit needs constant term 1, got {format_rational(a.constant_term)}"
        )
    one = a.one_like()
    tail = a - one
    t = a.zero_like()
    half = QQ(1, 2)
    for _ in range(a.degree_cap):
        t = scale(tail - mul(t, t), half)
    return one + t


def inverse_unit(a):
    """Multiplicative inverse of a jet with nonzero constant term."""
    c0 = a.constant_term
    if not c0:
        raise DomainError("inverse_unit needs a nonzero constant term")
    inv_c0 = QQ.one / c0
    one = a.one_like()
    u = scale(a, inv_c0) - one
    result = one
    for _ in range(a.degree_cap):
        result = one - mul(u, result)
    return scale(result, inv_c0)


def substitute(a, images):
    """Compose a with a coordinate map x_i -> images[i].

    Every image must vanish at the origin so the composition stays within
    the cap.
    """
    if len(images) != a.dim:
        raise ShapeError(f"substitute needs {a.dim} image jets, got {len(images)}")
    for position, image in enumerate(images, start=1):
        _require_same_shape(a, image, "substitute")
        if image.constant_term:
            raise DomainError(
                f"image of x{position} has nonzero constant term "
                f"{format_rational(image.constant_term)}"
            )

    top = a.degree_cap
    powers = []
    for image in images:
        chain = [image.one_like()]
        for _ in range(top):
            chain.append(mul(chain[-1], image))
        powers.append(chain)

    result = a.zero_like()
    for exponents, coeff in a._poly.items():
        term = a.one_like()
        for axis, e in enumerate(exponents):
            if e:
                term = mul(term, powers[axis][e])
        result = result + scale(term, coeff)
    return result
