"""Verifier Service.

Exact post-hoc checks of a realized Christoffel field Gamma (cap N + 1)
against the operator A and the normalized metric:

- curvature at the origin equals A
- scalar curvature is constant
- rho_a of the curvature is the constant rho_a(A)
- rho_s of the curvature in the frame is the constant rho_s(A)
- the conditional Ricci-symmetric / antisymmetric / traceless conclusions
- torsion-freeness and Gamma(0) = 0
- a finite-difference oracle for L(Gamma)

Curvature jets are compared through degree N - 1, one below their cap.
Checks never raise on failure: they return Verdicts with a witness.
"""

from sympy.polys.domains import QQ

from core.errors import DomainError
from core.models import Verdict, suite_passed
from services.frame_normalizer import (
    constant_jet_form,
    contract_with_frame,
    inverse_metric,
)
from services.jetcalc import Jet, evaluate, format_rational, to_rational, with_cap
from services.norms import weighted_norm_sample
from services.realizer import curvature_L, curvature_of, star_at_point
from services.tensor_algebra import (
    BilinearForm,
    contract_with_inverse,
    index_range,
    ricci,
    ricci_split,
    scalar_curvature,
    signs,
)

__all__ = [
    "check_constant_scalar_curvature",
    "check_realization_at_origin",
    "check_ricci_antisymmetric_part",
    "check_ricci_symmetric_part",
    "check_torsion_free",
    "check_vanishes_at_origin",
    "finite_difference_oracle",
    "finite_difference_verdict",
    "oracle_point",
    "verify_realization",
    "weighted_norm_sample",
]

DEFAULT_FD_STEP = QQ(1, 100)
RATIO_WINDOW = (QQ(7, 2), QQ(9, 2))


def _verified_degree(gamma):
    return gamma.degree_cap - 2


def _first_nonzero_term(jet, label, top_degree, low_degree=0):
    """Witness string for the first coefficient in [low, top] that is nonzero."""
    for exponents, coeff in jet.sorted_terms():
        degree = sum(exponents)
        if low_degree <= degree <= top_degree:
            return f"{label} has coefficient {format_rational(coeff)} at x^{list(exponents)}"
    return None


def _form_witness(form, label, top_degree):
    for (i, j), jet in sorted(form.entries.items()):
        witness = _first_nonzero_term(jet, f"{label}[{i},{j}]", top_degree)
        if witness:
            return witness
    return None


def _conditional(name, hypothesis_holds, conclusion_holds, witness, top):
    """A conclusion that only applies when A satisfies its hypothesis.

    passed and witness stay None when it does not apply.
    """
    if not hypothesis_holds:
        return Verdict(name=name, passed=None, applicable=False, verified_degree=top)
    return Verdict(
        name=name, passed=conclusion_holds, verified_degree=top, witness=witness
    )


def _through(form, degree):
    return BilinearForm(
        form.dim,
        {idx: with_cap(jet, degree) for idx, jet in form.entries.items()},
        Jet.zero(form.dim, degree),
    )


def check_realization_at_origin(gamma, operator, curvature=None):
    """R(Gamma)(0) == A exactly."""
    curvature = curvature or curvature_of(gamma)
    values = curvature.value_at_origin()
    for idx in index_range(operator.dim, 4):
        if values[idx] != operator[idx]:
            return Verdict(
                name="realization_at_origin",
                passed=False,
                verified_degree=0,
                witness=(
                    f"R{list(idx)}(0) = {format_rational(values[idx])}, "
                    f"A{list(idx)} = {format_rational(operator[idx])}"
                ),
            )
    return Verdict(name="realization_at_origin", passed=True, verified_degree=0)


def check_constant_scalar_curvature(gamma, metric, operator=None, curvature=None):
    """tau = g^ij rho_ij has no terms in degrees 1..N-1.

    When A is given, the constant must also equal tau(A, g(0)).
    """
    curvature = curvature or curvature_of(gamma)
    top = _verified_degree(gamma)
    cap = curvature.degree_cap
    rho = ricci(curvature)
    tau = contract_with_inverse(rho, inverse_metric(metric.with_cap(cap)))
    constant = tau.constant_term
    witness = _first_nonzero_term(tau, "tau", top, low_degree=1)
    if witness is None and operator is not None:
        expected = scalar_curvature(operator, metric.value_at_origin())
        if expected != constant:
            witness = (
                f"tau(0) = {format_rational(constant)} but tau(A, g(0)) = "
                f"{format_rational(expected)}"
            )
    return Verdict(
        name="constant_scalar_curvature",
        passed=witness is None,
        verified_degree=top,
        witness=witness,
        value=format_rational(constant),
    )


def check_ricci_antisymmetric_part(gamma, operator, curvature=None):
    """rho_a(R) == rho_a(A) as jets, plus the Ricci-symmetric conclusion.

    Returns [ricci_antisymmetric_part, ricci_symmetric_preserved].
    """
    curvature = curvature or curvature_of(gamma)
    top = _verified_degree(gamma)
    dim = gamma.dim
    antisymmetric, _ = ricci_split(ricci(curvature))
    target, _ = ricci_split(ricci(operator))
    difference = _through(antisymmetric, top) - constant_jet_form(target, dim, top)
    residual = _through(antisymmetric, top)
    return [
        Verdict(
            name="ricci_antisymmetric_part",
            passed=difference.is_zero(),
            verified_degree=top,
            witness=_form_witness(difference, "rho_a(R) - rho_a(A)", top),
        ),
        _conditional(
            "ricci_symmetric_preserved",
            target.is_zero(),
            residual.is_zero(),
            _form_witness(residual, "rho_a(R)", top),
            top,
        ),
    ]


def check_ricci_symmetric_part(gamma, operator, metric, frame, curvature=None):
    """rho_s(R)(E_i, E_j) == rho_s(A)_ij as jets, plus the conditional
    Ricci-antisymmetric and Ricci-traceless conclusions.

    Returns [ricci_symmetric_part, ricci_antisymmetric_preserved,
    ricci_traceless_preserved].
    """
    curvature = curvature or curvature_of(gamma)
    top = _verified_degree(gamma)
    dim = gamma.dim
    eps = signs(metric.signature)
    _, symmetric = ricci_split(ricci(curvature))
    _, target = ricci_split(ricci(operator))

    in_frame = contract_with_frame(symmetric, frame, top)
    difference = in_frame - constant_jet_form(target, dim, top)
    trace = Jet.zero(dim, top)
    for i in range(1, dim + 1):
        trace = trace + in_frame[(i, i)] * eps[i - 1]
    target_trace = scalar_curvature(operator, metric.value_at_origin())

    return [
        Verdict(
            name="ricci_symmetric_part",
            passed=difference.is_zero(),
            verified_degree=top,
            witness=_form_witness(difference, "rho_s(R)(E,E) - rho_s(A)", top),
        ),
        _conditional(
            "ricci_antisymmetric_preserved",
            target.is_zero(),
            in_frame.is_zero(),
            _form_witness(in_frame, "rho_s(R)(E,E)", top),
            top,
        ),
        _conditional(
            "ricci_traceless_preserved",
            not target_trace,
            trace.is_zero(),
            _first_nonzero_term(trace, "tau", top),
            top,
        ),
    ]


def check_torsion_free(gamma):
    for i, j, k in index_range(gamma.dim, 3):
        if i < j and gamma[(i, j, k)] != gamma[(j, i, k)]:
            return Verdict(
                name="torsion_free",
                passed=False,
                witness=f"Gamma_{i}{j}^{k} != Gamma_{j}{i}^{k}",
            )
    return Verdict(name="torsion_free", passed=True, verified_degree=gamma.degree_cap)


def check_vanishes_at_origin(gamma):
    for idx in index_range(gamma.dim, 3):
        value = gamma[idx].constant_term
        if value:
            return Verdict(
                name="vanishes_at_origin",
                passed=False,
                verified_degree=0,
                witness=f"Gamma{list(idx)}(0) = {format_rational(value)}",
            )
    return Verdict(name="vanishes_at_origin", passed=True, verified_degree=0)


def oracle_point(dim):
    """(1/5, 1/7, 1/9, ...): inside the sample ball, no coordinate repeated."""
    return tuple(QQ(1, 2 * a + 3) for a in range(1, dim + 1))


def finite_difference_oracle(gamma, point, step):
    """Central-difference curvature at a point against the jet curvature.

    Args:
        gamma: ChristoffelField
        point: rational coordinates x0
        step: rational h > 0

    Returns:
        dict with approximation, reference ({index: rational}) and
        discrepancy (max absolute componentwise difference). Both tensors
        share the exact 1/2 Gamma * Gamma value at x0, so the discrepancy
        is pure discretization error of the derivative part.

    Raises:
        DomainError: h <= 0
    """
    step = to_rational(step)
    if step <= 0:
        raise DomainError(f"finite-difference step must be positive, got {step}")
    dim = gamma.dim
    point = tuple(to_rational(v) for v in point)

    def shifted(axis, sign):
        return tuple(
            value + sign * step if a == axis else value
            for a, value in enumerate(point, start=1)
        )

    derivative = {}
    for axis in range(1, dim + 1):
        forward, backward = shifted(axis, 1), shifted(axis, -1)
        for idx in index_range(dim, 3):
            jet = gamma[idx]
            if not jet:
                derivative[(axis,) + idx] = QQ.zero
                continue
            derivative[(axis,) + idx] = (
                evaluate(jet, forward) - evaluate(jet, backward)
            ) / (2 * step)

    values = {idx: evaluate(gamma[idx], point) for idx in index_range(dim, 3)}
    quadratic = star_at_point(dim, values, values)
    linear = curvature_L(gamma)
    half = QQ(1, 2)

    approximation = {}
    reference = {}
    discrepancy = QQ.zero
    for i, j, k, l in index_range(dim, 4):
        shared = quadratic[(i, j, k, l)] * half
        approx = derivative[(i, j, k, l)] - derivative[(j, i, k, l)] + shared
        exact = evaluate(linear[(i, j, k, l)], point) + shared
        approximation[(i, j, k, l)] = approx
        reference[(i, j, k, l)] = exact
        gap = abs(approx - exact)
        if gap > discrepancy:
            discrepancy = gap
    return {
        "approximation": approximation,
        "reference": reference,
        "discrepancy": discrepancy,
    }


def finite_difference_verdict(gamma, point=None, step=DEFAULT_FD_STEP):
    """Discrepancy ratio at h and h/2 must lie in [7/2, 9/2] unless both vanish."""
    point = point or oracle_point(gamma.dim)
    step = to_rational(step)
    coarse = finite_difference_oracle(gamma, point, step)["discrepancy"]
    fine = finite_difference_oracle(gamma, point, step / 2)["discrepancy"]
    if not coarse and not fine:
        return Verdict(name="finite_difference_oracle", passed=True, value="exact")
    if not fine:
        return Verdict(
            name="finite_difference_oracle",
            passed=False,
            witness=f"discrepancy {format_rational(coarse)} at h, 0 at h/2",
        )
    ratio = coarse / fine
    low, high = RATIO_WINDOW
    return Verdict(
        name="finite_difference_oracle",
        passed=low <= ratio <= high,
        value=format_rational(ratio),
        witness=None if low <= ratio <= high else f"ratio {format_rational(ratio)}",
    )


def verify_realization(gamma, operator, metric, frame, fd_step=DEFAULT_FD_STEP):
    """Run every check on a realized field.

    metric and frame must be the normalized metric and its frame, i.e. live
    in the same coordinates as Gamma.
    """
    print(
        f"[VERIFY] Checking Gamma (m={gamma.dim}, cap {gamma.degree_cap}) "
        f"through degree {_verified_degree(gamma)}",
        flush=True,
    )
    curvature = curvature_of(gamma)
    verdicts = [
        check_realization_at_origin(gamma, operator, curvature),
        check_constant_scalar_curvature(gamma, metric, operator, curvature),
        *check_ricci_antisymmetric_part(gamma, operator, curvature),
        *check_ricci_symmetric_part(gamma, operator, metric, frame, curvature),
        check_torsion_free(gamma),
        check_vanishes_at_origin(gamma),
        finite_difference_verdict(gamma, step=fd_step),
    ]
    for verdict in verdicts:
        if not verdict.applicable:
            status = "n/a"
        else:
            status = "pass" if verdict.passed else "FAIL"
        detail = f" - {verdict.witness}" if verdict.witness else ""
        print(f"[VERIFY] {verdict.name}: {status}{detail}", flush=True)
    print(f"[VERIFY] Suite {'passed' if suite_passed(verdicts) else 'FAILED'}", flush=True)
    return verdicts
