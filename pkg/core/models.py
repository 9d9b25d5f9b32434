"""Document and report models.

Two kinds of structures live here:
1. Pydantic models - every JSON document that crosses the process
   boundary (model input, Christoffel output, report, verdicts,
   classification) is validated with Model.model_validate on load and
   written with model_dump.
2. Factory helpers - create_normalization_record builds the per-iteration
   normalization record and suite_passed folds a verdict list into one
   flag.

Math values themselves (jets, tensors, fields) are not pydantic models;
services/codec.py converts between the two worlds.

Rationals are always strings "p/q" (or "p"), never decimals.
"""

from typing import Literal

from pydantic import BaseModel, Field

FORMAT_VERSION = 1


class TermRecord(BaseModel):
    """One monomial of a jet: coeff * x^exponents."""

    exponents: list[int]
    coeff: str


class TensorEntry(BaseModel):
    """Nonzero entry of a constant tensor; omitted entries are zero."""

    indices: list[int]
    value: str


class JetEntry(BaseModel):
    """Entry of a jet-valued tensor."""

    indices: list[int]
    jet: list[TermRecord]


class MetricEntry(BaseModel):
    """g_ij as a jet; the symmetric partner is filled in on load."""

    i: int
    j: int
    jet: list[TermRecord]


class MetricDocument(BaseModel):
    signature: list[int]
    degree_cap: int
    entries: list[MetricEntry]


class ModelOptions(BaseModel):
    order: int | None = None
    seed: int | None = None


class ModelDocument(BaseModel):
    """The pair (A, g) to realize plus run options.

    metric is either a constant matrix of rational strings or a jet-valued
    MetricDocument.
    """

    format_version: int = FORMAT_VERSION
    kind: Literal["model"] = "model"
    dim: int
    signature: list[int]
    metric: MetricDocument | list[list[str]]
    operator: list[TensorEntry]
    options: ModelOptions = Field(default_factory=ModelOptions)


class ChristoffelDocument(BaseModel):
    """Realized Christoffel symbol in normalized coordinates.

    coordinate_map[i] is the jet x^(i+1)(y) applied by the normalizer.
    """

    format_version: int = FORMAT_VERSION
    kind: Literal["christoffel"] = "christoffel"
    dim: int
    degree_cap: int
    coordinate_map: list[list[TermRecord]]
    components: list[JetEntry]


class Verdict(BaseModel):
    """Outcome of one exact check.

    applicable is False when a conditional conclusion's hypothesis does not
    hold for A; such verdicts carry passed = None and do not fail the suite.
    """

    name: str
    passed: bool | None
    applicable: bool = True
    verified_degree: int | None = None
    witness: str | None = None
    value: str | None = None


class NormalizationRecord(BaseModel):
    """The three normalization conditions of an intermediate Gamma."""

    gamma_vanishes_at_origin: bool
    curvature_matches_to_second_order: bool
    rho_s_regularity: str = "vacuous at finite order"
    rho_a_constant: bool


class IterationRecord(BaseModel):
    """Diagnostics of one pass of the correction loop.

    theta_valuation is None when Theta vanished (infinite valuation);
    norms are sampled, never used as stopping criteria.
    """

    nu: int
    theta_valuation: int | None
    theta_weight: int
    theta_norm: str
    gamma_norm: str
    correction_valuation: int | None = None
    correction_norm: str | None = None
    normalization: NormalizationRecord
    recursion_identity_holds: bool | None = None


class RealizationReport(BaseModel):
    format_version: int = FORMAT_VERSION
    kind: Literal["realization_report"] = "realization_report"
    dim: int
    signature: list[int]
    order: int
    christoffel_cap: int
    curvature_cap: int
    sample_radius: str
    normal_form: dict[str, bool]
    coordinate_map: list[list[TermRecord]]
    frame_deviation_valuation: int | None
    second_order_frame: bool
    iteration_bound: int
    iterations: list[IterationRecord] = Field(default_factory=list)
    converged: bool = False
    verified_degree: int | None = None
    verdicts: list[Verdict] = Field(default_factory=list)
    passed: bool | None = None


class VerdictDocument(BaseModel):
    format_version: int = FORMAT_VERSION
    kind: Literal["verdicts"] = "verdicts"
    passed: bool
    verdicts: list[Verdict]


class ClassificationDocument(BaseModel):
    format_version: int = FORMAT_VERSION
    kind: Literal["classification"] = "classification"
    dim: int
    signature: list[int]
    flags: dict[str, bool]
    ricci_pattern: dict[str, bool]
    ricci: list[list[str]]
    ricci_antisymmetric: list[list[str]]
    ricci_symmetric: list[list[str]]
    trace_free_ricci: list[list[str]]
    scalar_curvature: str


def create_normalization_record(vanishes, matches, rho_a_constant):
    return NormalizationRecord(
        gamma_vanishes_at_origin=vanishes,
        curvature_matches_to_second_order=matches,
        rho_a_constant=rho_a_constant,
    )


def suite_passed(verdicts):
    """True iff every applicable verdict passed."""
    return all(v.passed or not v.applicable for v in verdicts)
