"""JSON codecs between math values and document models.

Rationals travel as exact "p/q" strings. Every loader validates its input
and raises DocumentError naming the violated invariant; writers emit
entries in a fixed order (index tuples ascending, terms graded) so equal
inputs give byte-identical documents.
"""

import re

from pydantic import ValidationError

from core.errors import DocumentError, DomainError, ShapeError
from core.models import (
    ChristoffelDocument,
    JetEntry,
    MetricDocument,
    MetricEntry,
    ModelDocument,
    TensorEntry,
    TermRecord,
)
from services.frame_normalizer import MetricField, constant_metric
from services.jetcalc import Jet, format_rational, to_rational
from services.tensor_algebra import AlgebraicCurvatureOperator, index_range

RATIONAL_PATTERN = re.compile(r"^-?\d+(/\d+)?$")


def parse_rational(text, where="value"):
    """Strict "p" or "p/q" parser; decimals and floats are rejected."""
    if not isinstance(text, str) or not RATIONAL_PATTERN.match(text.strip()):
        raise DocumentError(f"{where}: {text!r} is not an exact rational 'p/q'")
    if text.strip().endswith("/0"):
        raise DocumentError(f"{where}: zero denominator in {text!r}")
    return to_rational(text.strip())


def jet_to_records(jet):
    return [
        TermRecord(exponents=list(exponents), coeff=format_rational(coeff))
        for exponents, coeff in jet.sorted_terms()
    ]


def records_to_jet(dim, degree_cap, records, where="jet"):
    terms = {}
    for record in records:
        exponents = tuple(record.exponents)
        if exponents in terms:
            raise DocumentError(f"{where}: duplicate monomial {list(exponents)}")
        terms[exponents] = parse_rational(record.coeff, where)
    try:
        return Jet.from_terms(dim, degree_cap, terms)
    except (ShapeError, DomainError) as exc:
        raise DocumentError(f"{where}: {exc}") from exc


def _check_indices(indices, rank, dim, where):
    if len(indices) != rank or any(not 1 <= i <= dim for i in indices):
        raise DocumentError(
            f"{where}: indices {indices} must be {rank} values in 1..{dim}"
        )
    return tuple(indices)


def operator_to_entries(operator):
    return [
        TensorEntry(indices=list(idx), value=format_rational(operator[idx]))
        for idx in index_range(operator.dim, 4)
        if operator[idx]
    ]


def entries_to_operator(dim, entries):
    """Sparse entries -> AlgebraicCurvatureOperator (symmetries validated)."""
    raw = {}
    for entry in entries:
        idx = _check_indices(entry.indices, 4, dim, "operator")
        if idx in raw:
            raise DocumentError(f"operator: duplicate entry {list(idx)}")
        raw[idx] = parse_rational(entry.value, f"operator{list(idx)}")
    try:
        return AlgebraicCurvatureOperator(dim, raw)
    except DomainError as exc:
        raise DocumentError(f"operator: {exc}") from exc


def metric_to_document(metric):
    return MetricDocument(
        signature=list(metric.signature),
        degree_cap=metric.degree_cap,
        entries=[
            MetricEntry(i=i, j=j, jet=jet_to_records(metric[(i, j)]))
            for i, j in index_range(metric.dim, 2)
            if i <= j and metric[(i, j)]
        ],
    )


def document_to_metric(document, dim, signature):
    """MetricDocument or constant rational matrix -> MetricField.

    Only the upper triangle is read from a MetricDocument; a lower entry
    that disagrees with its partner is a symmetry violation.
    """
    signature = tuple(signature)
    try:
        if isinstance(document, MetricDocument):
            if tuple(document.signature) != signature:
                raise DocumentError(
                    f"metric signature {document.signature} differs from model "
                    f"signature {list(signature)}"
                )
            jets = {}
            for entry in document.entries:
                i, j = _check_indices([entry.i, entry.j], 2, dim, "metric")
                jet = records_to_jet(dim, document.degree_cap, entry.jet, f"g_{i}{j}")
                if (i, j) in jets:
                    raise DocumentError(f"metric: duplicate entry ({i}, {j})")
                jets[(i, j)] = jet
            zero = Jet.zero(dim, document.degree_cap)
            entries = {}
            for i, j in index_range(dim, 2):
                upper = jets.get((min(i, j), max(i, j)), zero)
                lower = jets.get((max(i, j), min(i, j)))
                if lower is not None and lower != upper:
                    raise DocumentError(f"metric is not symmetric at ({i}, {j})")
                entries[(i, j)] = upper
            return MetricField(dim, signature, document.degree_cap, entries)

        rows = document
        if len(rows) != dim or any(len(row) != dim for row in rows):
            raise DocumentError(f"metric matrix must be {dim}x{dim}")
        values = [
            [parse_rational(value, f"g[{a + 1}][{b + 1}]") for b, value in enumerate(row)]
            for a, row in enumerate(rows)
        ]
        return constant_metric(signature, 0, values)
    except (DomainError, ShapeError) as exc:
        raise DocumentError(f"metric: {exc}") from exc


def christoffel_to_document(gamma, coordinate_map):
    return ChristoffelDocument(
        dim=gamma.dim,
        degree_cap=gamma.degree_cap,
        coordinate_map=[jet_to_records(jet) for jet in coordinate_map],
        components=[
            JetEntry(indices=list(idx), jet=jet_to_records(gamma[idx]))
            for idx in index_range(gamma.dim, 3)
            if gamma[idx]
        ],
    )


def document_to_christoffel(document):
    """ChristoffelDocument -> ChristoffelField; torsion is a load error."""
    from services.realizer import ChristoffelField

    dim, cap = document.dim, document.degree_cap
    zero = Jet.zero(dim, cap)
    entries = {idx: zero for idx in index_range(dim, 3)}
    seen = set()
    for component in document.components:
        idx = _check_indices(component.indices, 3, dim, "christoffel")
        if idx in seen:
            raise DocumentError(f"christoffel: duplicate component {list(idx)}")
        seen.add(idx)
        entries[idx] = records_to_jet(dim, cap, component.jet, f"Gamma{list(idx)}")
    try:
        return ChristoffelField(dim, cap, entries)
    except (DomainError, ShapeError) as exc:
        raise DocumentError(f"christoffel: {exc}") from exc


def form_rows(form):
    return [[format_rational(value) for value in row] for row in form.rows()]


def validate_model(payload):
    """dict -> (ModelDocument, operator, metric) with every load check applied."""
    try:
        document = ModelDocument.model_validate(payload)
    except ValidationError as exc:
        raise DocumentError(f"model document: {exc}") from exc
    if document.format_version != 1:
        raise DocumentError(f"unsupported format_version {document.format_version}")
    p, q = document.signature if len(document.signature) == 2 else (-1, -1)
    if p < 0 or q < 0 or p + q != document.dim:
        raise DocumentError(
            f"signature {document.signature} does not fit dimension {document.dim}"
        )
    if document.dim < 3:
        raise DocumentError(f"dimension must be >= 3, got {document.dim}")
    if document.options.order is not None and document.options.order < 2:
        raise DocumentError(f"order must be >= 2, got {document.options.order}")
    operator = entries_to_operator(document.dim, document.operator)
    metric = document_to_metric(document.metric, document.dim, document.signature)
    print(
        f"[CODEC] Loaded model: m={document.dim}, signature={tuple(document.signature)}, "
        f"{len(document.operator)} operator entries, metric cap {metric.degree_cap}",
        flush=True,
    )
    return document, operator, metric


def validate_christoffel(payload):
    try:
        document = ChristoffelDocument.model_validate(payload)
    except ValidationError as exc:
        raise DocumentError(f"christoffel document: {exc}") from exc
    gamma = document_to_christoffel(document)
    coordinate_map = [
        records_to_jet(document.dim, document.degree_cap, records, f"x{i}(y)")
        for i, records in enumerate(document.coordinate_map, start=1)
    ]
    print(
        f"[CODEC] Loaded Christoffel field: m={gamma.dim}, cap {gamma.degree_cap}, "
        f"{len(document.components)} components",
        flush=True,
    )
    return document, gamma, coordinate_map
