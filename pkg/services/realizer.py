"""Realizer Service.

Builds a torsion-free Christoffel symbol whose curvature equals a given
operator A at the origin and whose Ricci tensor has constant frame
components, by iterating on jets:

1. initial_gamma - linear Gamma_1 with curvature A at 0
2. theta - Theta_nu = rho_s(R(Gamma_nu))(E_i, E_j) - rho_s(A)_ij
3. solve_correction - trace-free E with rho(L(E)) = -Theta
4. realize - Gamma_{nu+1} = Gamma_nu + E_{nu+1} until Theta vanishes

Degree caps are fixed per run: Christoffel fields at N + 1, curvature and
Theta at N. Differentiation loses one degree, so the curvature cap is
always one below the Christoffel cap.
"""

import math
from dataclasses import dataclass, field

from sympy.polys.domains import QQ

from core.errors import DomainError, InvariantViolation, NormalFormError, ShapeError
from core.models import (
    IterationRecord,
    RealizationReport,
    create_normalization_record,
)
from services.codec import jet_to_records
from services.frame_normalizer import (
    NORMAL_FORM_HINT,
    constant_jet_form,
    contract_with_frame,
    orthonormal_frame,
    quadratic_normalize,
    validate_normal_form,
)
from services.jetcalc import (
    Jet,
    format_rational,
    integrate_axis,
    partial_derivative,
    to_rational,
    valuation,
    with_cap,
)
from services.norms import DEFAULT_SAMPLE_RADIUS, weighted_norm_sample
from services.tensor_algebra import (
    MIN_CURVATURE_DIM,
    BilinearForm,
    index_range,
    ricci,
    ricci_split,
    symmetry_defects,
)


@dataclass(frozen=True, eq=True)
class ChristoffelField:
    """Gamma_ij^k as jets; entries[(i, j, k)] is Gamma_ij^k.

    Torsion-free: Gamma_ij^k == Gamma_ji^k is checked on construction.
    """

    dim: int
    degree_cap: int
    entries: dict = field(repr=False)

    def __post_init__(self):
        for idx in index_range(self.dim, 3):
            if idx not in self.entries:
                raise ShapeError(f"Christoffel component {idx} missing")
            jet = self.entries[idx]
            if jet.dim != self.dim or jet.degree_cap != self.degree_cap:
                raise ShapeError(
                    f"Christoffel component {idx} has shape "
                    f"(m={jet.dim}, N={jet.degree_cap}), "
                    f"expected (m={self.dim}, N={self.degree_cap})"
                )
        for i, j, k in index_range(self.dim, 3):
            if i < j and self.entries[(i, j, k)] != self.entries[(j, i, k)]:
                raise DomainError(
                    f"Christoffel symbol has torsion: Gamma_{i}{j}^{k} != Gamma_{j}{i}^{k}"
                )

    def __getitem__(self, idx):
        return self.entries[idx]

    @property
    def zero(self):
        return Jet.zero(self.dim, self.degree_cap)

    @classmethod
    def zero_field(cls, dim, degree_cap):
        zero = Jet.zero(dim, degree_cap)
        return cls(dim, degree_cap, {idx: zero for idx in index_range(dim, 3)})

    def __add__(self, other):
        _require_compatible(self, other, "add")
        return ChristoffelField(
            self.dim,
            self.degree_cap,
            {idx: jet + other.entries[idx] for idx, jet in self.entries.items()},
        )

    def scaled(self, factor):
        factor = to_rational(factor)
        return ChristoffelField(
            self.dim,
            self.degree_cap,
            {idx: jet * factor for idx, jet in self.entries.items()},
        )

    def with_cap(self, degree_cap):
        return ChristoffelField(
            self.dim,
            degree_cap,
            {idx: with_cap(jet, degree_cap) for idx, jet in self.entries.items()},
        )

    def trace(self):
        """{i: sum_j Gamma_ij^j}."""
        return {
            i: _jet_sum(
                (self.entries[(i, j, j)] for j in range(1, self.dim + 1)), self.zero
            )
            for i in range(1, self.dim + 1)
        }

    def valuation(self):
        return min(valuation(jet) for jet in self.entries.values())

    def is_zero(self):
        return not any(self.entries.values())


@dataclass(frozen=True, eq=True)
class CurvatureField:
    """R_ijk^l as jets; entries[(i, j, k, l)] is R_ijk^l."""

    dim: int
    degree_cap: int
    entries: dict = field(repr=False)

    def __getitem__(self, idx):
        return self.entries[idx]

    @property
    def zero(self):
        return Jet.zero(self.dim, self.degree_cap)

    def __add__(self, other):
        return CurvatureField(
            self.dim,
            self.degree_cap,
            {idx: jet + other.entries[idx] for idx, jet in self.entries.items()},
        )

    def __sub__(self, other):
        return CurvatureField(
            self.dim,
            self.degree_cap,
            {idx: jet - other.entries[idx] for idx, jet in self.entries.items()},
        )

    def scaled(self, factor):
        factor = to_rational(factor)
        return CurvatureField(
            self.dim,
            self.degree_cap,
            {idx: jet * factor for idx, jet in self.entries.items()},
        )

    def value_at_origin(self):
        return {idx: jet.constant_term for idx, jet in self.entries.items()}

    def valuation(self):
        return min(valuation(jet) for jet in self.entries.values())


def _jet_sum(values, zero):
    total = zero
    for value in values:
        if value:
            total = total + value
    return total


def _require_compatible(a, b, op):
    if a.dim != b.dim or a.degree_cap != b.degree_cap:
        raise ShapeError(
            f"{op}: shape mismatch (m={a.dim}, N={a.degree_cap}) "
            f"vs (m={b.dim}, N={b.degree_cap})"
        )


def _curvature_cap(gamma):
    if gamma.degree_cap < 1:
        raise ShapeError("Christoffel fields need a degree cap of at least 1")
    return gamma.degree_cap - 1


def curvature_L(gamma):
    """L(Gamma)_ijk^l = d_i Gamma_jk^l - d_j Gamma_ik^l, at cap N.

    Both curvature identities are asserted on the result.
    """
    dim = gamma.dim
    cap = _curvature_cap(gamma)
    derivatives = {
        (axis, j, k, l): with_cap(partial_derivative(gamma[(j, k, l)], axis), cap)
        for axis, j, k, l in index_range(dim, 4)
    }
    entries = {
        (i, j, k, l): derivatives[(i, j, k, l)] - derivatives[(j, i, k, l)]
        for i, j, k, l in index_range(dim, 4)
    }
    antisym, cyclic = symmetry_defects(dim, entries)
    if antisym is not None or cyclic is not None:
        raise InvariantViolation(
            f"L(Gamma) breaks curvature identities (antisymmetry {antisym}, "
            f"cyclic {cyclic}); Gamma is not torsion-free"
        )
    return CurvatureField(dim, cap, entries)


def _star_entries(dim, left, right, zero):
    """(left * right)_ijk^l over any scalar type.

    P_ijk^l = sum_n right_in^l left_jk^n + left_in^l right_jk^n, and the
    product is P_ijk^l - P_jik^l.
    """
    partial = {}
    for i, j, k, l in index_range(dim, 4):
        total = zero
        for n in range(1, dim + 1):
            a, b = right[(i, n, l)], left[(j, k, n)]
            if a and b:
                total = total + a * b
            a, b = left[(i, n, l)], right[(j, k, n)]
            if a and b:
                total = total + a * b
        partial[(i, j, k, l)] = total
    return {
        (i, j, k, l): partial[(i, j, k, l)] - partial[(j, i, k, l)]
        for i, j, k, l in index_range(dim, 4)
    }


def star(gamma, other):
    """Bilinear product Gamma * E at the curvature cap."""
    _require_compatible(gamma, other, "star")
    cap = _curvature_cap(gamma)
    left = gamma.with_cap(cap)
    right = other.with_cap(cap)
    return CurvatureField(
        gamma.dim,
        cap,
        _star_entries(gamma.dim, left.entries, right.entries, Jet.zero(gamma.dim, cap)),
    )


def star_at_point(dim, left, right):
    """Rational (Gamma * E)(x0) from component values {(i, j, k): rational} at x0."""
    return _star_entries(dim, left, right, QQ.zero)


def curvature_of(gamma):
    """R = L(Gamma) + 1/2 Gamma * Gamma."""
    return curvature_L(gamma) + star(gamma, gamma).scaled(QQ(1, 2))


def ricci_of_christoffel(gamma):
    """rho(R(Gamma)) without building the full curvature tensor.

    rho_jk = d_i Gamma_jk^i - d_j Gamma_ik^i
             + Gamma_ln^l Gamma_jk^n - Gamma_jn^l Gamma_lk^n
    """
    dim = gamma.dim
    cap = _curvature_cap(gamma)
    low = gamma.with_cap(cap)
    zero = Jet.zero(dim, cap)
    trace = low.trace()
    divergence = {
        (j, k): _jet_sum(
            (with_cap(partial_derivative(gamma[(j, k, i)], i), cap) for i in range(1, dim + 1)),
            zero,
        )
        for j, k in index_range(dim, 2)
    }
    full_trace = gamma.trace()
    entries = {}
    for j, k in index_range(dim, 2):
        value = divergence[(j, k)] - with_cap(partial_derivative(full_trace[k], j), cap)
        for n in range(1, dim + 1):
            if trace[n] and low[(j, k, n)]:
                value = value + trace[n] * low[(j, k, n)]
            for l in range(1, dim + 1):
                if low[(j, n, l)] and low[(l, k, n)]:
                    value = value - low[(j, n, l)] * low[(l, k, n)]
        entries[(j, k)] = value
    return BilinearForm(dim, entries, zero)


def ricci_of_star(gamma, other):
    """rho(Gamma * E) contracted directly.

    rho_jk = E_in^i Gamma_jk^n + Gamma_in^i E_jk^n
             - E_jn^i Gamma_ik^n - Gamma_jn^i E_ik^n
    """
    _require_compatible(gamma, other, "ricci_of_star")
    dim = gamma.dim
    cap = _curvature_cap(gamma)
    g = gamma.with_cap(cap)
    e = other.with_cap(cap)
    zero = Jet.zero(dim, cap)
    g_trace = g.trace()
    e_trace = e.trace()
    entries = {}
    for j, k in index_range(dim, 2):
        value = zero
        for n in range(1, dim + 1):
            if e_trace[n] and g[(j, k, n)]:
                value = value + e_trace[n] * g[(j, k, n)]
            if g_trace[n] and e[(j, k, n)]:
                value = value + g_trace[n] * e[(j, k, n)]
            for i in range(1, dim + 1):
                if e[(j, n, i)] and g[(i, k, n)]:
                    value = value - e[(j, n, i)] * g[(i, k, n)]
                if g[(j, n, i)] and e[(i, k, n)]:
                    value = value - g[(j, n, i)] * e[(i, k, n)]
        entries[(j, k)] = value
    return BilinearForm(dim, entries, zero)


def initial_gamma(operator, degree_cap):
    """Gamma_uv^l = 1/3 sum_w (A_wuv^l + A_wvu^l) x^w."""
    dim = operator.dim
    if degree_cap < 1:
        raise ShapeError("initial_gamma needs a degree cap of at least 1")
    third = QQ(1, 3)
    coordinates = [Jet.variable(dim, degree_cap, w) for w in range(1, dim + 1)]
    entries = {}
    for u, v, l in index_range(dim, 3):
        jet = Jet.zero(dim, degree_cap)
        for w in range(1, dim + 1):
            coeff = (operator[(w, u, v, l)] + operator[(w, v, u, l)]) * third
            if coeff:
                jet = jet + coordinates[w - 1] * coeff
        entries[(u, v, l)] = jet
    return ChristoffelField(dim, degree_cap, entries)


def theta_from_ricci(ricci_form, operator, frame):
    """Theta_ij = rho_s(E_i, E_j) - rho_s(A)_ij for a curvature-level Ricci jet."""
    dim = ricci_form.dim
    cap = ricci_form.zero.degree_cap
    _, symmetric = ricci_split(ricci_form)
    _, target = ricci_split(ricci(operator))
    return contract_with_frame(symmetric, frame, cap) - constant_jet_form(target, dim, cap)


def theta(gamma, operator, frame):
    """Theta field of Gamma against A in the frame, at the curvature cap."""
    if gamma.dim != operator.dim or gamma.dim != frame.dim:
        raise ShapeError(
            f"theta: dimension mismatch Gamma m={gamma.dim}, A m={operator.dim}, "
            f"frame m={frame.dim}"
        )
    return theta_from_ricci(ricci_of_christoffel(gamma), operator, frame)


def admissible_axis(i, j, dim):
    """Smallest axis k with k != i and k != j."""
    if dim < MIN_CURVATURE_DIM:
        raise DomainError(f"no admissible axis for m = {dim}; need m >= {MIN_CURVATURE_DIM}")
    for k in range(1, dim + 1):
        if k != i and k != j:
            return k
    raise DomainError(f"no admissible axis for ({i}, {j})")


def solve_correction(theta_field, degree_cap):
    """Trace-free E with rho(L(E)) = -Theta.

    E_ij^k = integral of -Theta_ij along x_k for k = admissible_axis(i, j),
    all other components zero.
    """
    dim = theta_field.dim
    if dim < MIN_CURVATURE_DIM:
        raise DomainError(f"solve_correction needs m >= {MIN_CURVATURE_DIM}, got {dim}")
    if not theta_field.is_symmetric():
        raise DomainError("solve_correction needs a symmetric Theta")
    zero = Jet.zero(dim, degree_cap)
    entries = {idx: zero for idx in index_range(dim, 3)}
    for i, j in index_range(dim, 2):
        source = theta_field[(i, j)]
        if not source:
            continue
        k = admissible_axis(i, j, dim)
        entries[(i, j, k)] = integrate_axis(-with_cap(source, degree_cap), k)
    return ChristoffelField(dim, degree_cap, entries)


def normalization_conditions(gamma, operator):
    """Check the three normalization conditions of an intermediate Gamma.

    (1) Gamma(0) = 0 and R(Gamma) = A + O(|x|^2); the curvature is only
        needed through degree 1, so it is computed from Gamma at cap 2.
    (2) regularity of rho_s(R); no content on polynomial jets.
    (3) rho_a(R(Gamma)) is the constant rho_a(A).
    """
    dim = gamma.dim
    vanishes = all(not jet.constant_term for jet in gamma.entries.values())

    low = curvature_of(gamma.with_cap(min(2, gamma.degree_cap)))
    matches = all(
        valuation(low[idx] - Jet.constant(dim, low.degree_cap, operator[idx])) >= 2
        for idx in index_range(dim, 4)
    )

    antisymmetric, _ = ricci_split(ricci_of_christoffel(gamma))
    target, _ = ricci_split(ricci(operator))
    cap = antisymmetric.zero.degree_cap
    rho_a_constant = (antisymmetric - constant_jet_form(target, dim, cap)).is_zero()
    return create_normalization_record(vanishes, matches, rho_a_constant)


def frame_theta(theta_field, frame):
    """Theta(E_i, E_j) at Theta's own cap."""
    return contract_with_frame(theta_field, frame, theta_field.zero.degree_cap)


def _valuation_or_none(value):
    return None if value == math.inf else int(value)


def _form_valuation(form):
    return min(valuation(jet) for jet in form.entries.values())


def _trace_preserved(before, after):
    before_trace = before.trace()
    after_trace = after.trace()
    return all(before_trace[i] == after_trace[i] for i in before_trace)


def iteration_bound(order, second_order_frame):
    if second_order_frame:
        return (order + 2) // 2
    return order + 1


def prepare_coordinates(metric, order, verbose=True):
    """(coordinate_map, normalized metric, frame) at the Christoffel cap N + 1.

    Deterministic, so a stored realization can be re-checked against the
    same normalized metric and frame.
    """
    coordinate_map, normalized = quadratic_normalize(metric.with_cap(order + 1), verbose)
    return coordinate_map, normalized, orthonormal_frame(normalized, verbose)


def realize(
    operator,
    metric,
    order,
    sample_radius=DEFAULT_SAMPLE_RADIUS,
    verbose=True,
    coordinates=None,
):
    """Run the correction loop and return (Gamma_inf, RealizationReport).

    Args:
        operator: AlgebraicCurvatureOperator A (m >= 3)
        metric: MetricField with g(0) = diag(eps); degree-1 terms are
            removed by a quadratic coordinate change recorded in the report
        order: curvature order N >= 2; Christoffel jets carry N + 1
        sample_radius: delta of the sampled diagnostic norms
        verbose: print one line per iteration
        coordinates: (coordinate_map, normalized metric, frame) from
            prepare_coordinates, computed here when omitted

    Raises:
        DomainError: order < 2
        ShapeError: A and g live in different dimensions
        NormalFormError: g(0) is not diag(eps)
        InvariantViolation: an asserted identity failed
    """
    if order < 2:
        raise DomainError(f"order N must be >= 2, got {order}")
    if operator.dim != metric.dim:
        raise ShapeError(f"A has m={operator.dim} but g has m={metric.dim}")

    def log(message):
        if verbose:
            print(f"[REALIZER] {message}", flush=True)

    dim = operator.dim
    gamma_cap = order + 1
    sample_radius = to_rational(sample_radius)

    normal_form = validate_normal_form(metric)
    if not normal_form["value_normalized"]:
        raise NormalFormError(f"metric value at 0 is not diag(eps); {NORMAL_FORM_HINT}")
    if coordinates is None:
        coordinates = prepare_coordinates(metric, order, verbose)
    coordinate_map, _, frame = coordinates
    deviation = frame.deviation_valuation()
    second_order_frame = deviation >= 2
    bound = iteration_bound(order, second_order_frame)
    log(
        f"m={dim}, N={order}, frame deviation valuation {deviation}, "
        f"iteration bound {bound}"
    )

    report = RealizationReport(
        dim=dim,
        signature=list(metric.signature),
        order=order,
        christoffel_cap=gamma_cap,
        curvature_cap=order,
        sample_radius=format_rational(sample_radius),
        normal_form=normal_form,
        coordinate_map=[jet_to_records(jet) for jet in coordinate_map],
        frame_deviation_valuation=_valuation_or_none(deviation),
        second_order_frame=second_order_frame,
        iteration_bound=bound,
    )

    gamma = initial_gamma(operator, gamma_cap)
    predicted = None
    previous_valuation = None
    nu = 1
    while True:
        if nu > order + 2:
            raise InvariantViolation(
                f"Theta did not vanish within {order + 2} iterations"
            )

        theta_field = theta(gamma, operator, frame)
        theta_valuation = _form_valuation(theta_field)
        recursion_holds = None
        if predicted is not None:
            recursion_holds = theta_field == predicted
            if not recursion_holds:
                raise InvariantViolation(
                    f"Theta recursion identity failed at iteration {nu}"
                )
        if previous_valuation is not None and theta_valuation < previous_valuation + 1:
            raise InvariantViolation(
                f"valuation of Theta_{nu} is {theta_valuation}, "
                f"previous was {previous_valuation}"
            )
        if second_order_frame and theta_valuation < 2 * nu:
            raise InvariantViolation(
                f"valuation of Theta_{nu} is {theta_valuation} < {2 * nu}"
            )

        normalization = normalization_conditions(gamma, operator)
        if not (
            normalization.gamma_vanishes_at_origin
            and normalization.curvature_matches_to_second_order
            and normalization.rho_a_constant
        ):
            raise InvariantViolation(f"Gamma_{nu} is not normalized: {normalization}")

        record = IterationRecord(
            nu=nu,
            theta_valuation=_valuation_or_none(theta_valuation),
            theta_weight=2 * nu,
            theta_norm=format_rational(
                weighted_norm_sample(theta_field, 2 * nu, sample_radius)
            ),
            gamma_norm=format_rational(weighted_norm_sample(gamma, 1, sample_radius)),
            normalization=normalization,
            recursion_identity_holds=recursion_holds,
        )

        if theta_field.is_zero():
            report.iterations.append(record)
            log(f"nu={nu}: Theta vanished; converged")
            break

        correction = solve_correction(theta_field, gamma_cap)
        record.correction_valuation = _valuation_or_none(correction.valuation())
        record.correction_norm = format_rational(
            weighted_norm_sample(correction, 2 * nu + 1, sample_radius)
        )
        report.iterations.append(record)
        log(
            f"nu={nu}: val(Theta)={theta_valuation}, "
            f"val(E)={record.correction_valuation}, |Theta|={record.theta_norm}"
        )

        following = gamma + correction
        if not _trace_preserved(gamma, following):
            raise InvariantViolation(f"correction {nu + 1} changed the trace of Gamma")

        # Theta_{nu+1} = Theta_nu - Theta_nu(E, E) + rho_s((Gamma + E/2) * E)(E, E)
        _, quadratic = ricci_split(
            ricci_of_star(gamma + correction.scaled(QQ(1, 2)), correction)
        )
        predicted = (
            theta_field
            - frame_theta(theta_field, frame)
            + contract_with_frame(quadratic, frame, order)
        )

        previous_valuation = theta_valuation
        gamma = following
        nu += 1

    report.converged = True
    return gamma, report
