"""Curvature realization pipeline.

This is the orchestration module behind every CLI command. Each command
loads and validates its documents, runs the services, and writes its
outputs as JSON files.

Commands:
1. realize - normalize the metric, run the correction loop, verify, write
   the Christoffel document and the realization report
2. check - re-run the verifier suite on a stored Christoffel document
3. classify - classification flags and Ricci data of a model's operator
4. random_model - deterministic random model document from a seed

Run directories are named from the input file and a digest of its
content, so identical inputs land in the same place with identical bytes.
"""

import json
import re
from hashlib import sha256
from pathlib import Path

from core.errors import DocumentError, NormalFormError, ShapeError
from core.models import (
    ClassificationDocument,
    ModelDocument,
    ModelOptions,
    VerdictDocument,
    suite_passed,
)
from services.codec import (
    christoffel_to_document,
    form_rows,
    metric_to_document,
    operator_to_entries,
    validate_christoffel,
    validate_model,
)
from services.frame_normalizer import NORMAL_FORM_HINT, random_metric, validate_normal_form
from services.jetcalc import format_rational
from services.realizer import prepare_coordinates, realize
from services.tensor_algebra import (
    InnerProduct,
    classify,
    random_aco,
    ricci,
    ricci_split,
    scalar_curvature,
    sigma_a,
    sigma_s,
    trace_free_ricci,
)
from services.verifier import verify_realization


def slugify(value: str) -> str:
    """Convert text to a filesystem-safe slug.

    Args:
        value: Input text

    Returns:
        Slugified string (or "model" if empty result)
    """
    value = re.sub(r"[^a-zA-Z0-9]+", "-", value).strip("-").lower()
    return value or "model"


class PipelineResult(dict):
    """Command result with property accessors.

    - run_dir: directory holding the outputs
    - outputs: {name: path} of every written document
    - passed: verification outcome (None for commands that do not verify)
    """

    @property
    def run_dir(self):
        return self["run_dir"]

    @property
    def outputs(self):
        return self["outputs"]

    @property
    def passed(self):
        return self.get("passed")


def _read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise DocumentError(f"document not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path} is not valid JSON: {exc}") from exc


def _write_json(path, payload):
    """Write JSON data to a file with stable formatting.

    Args:
        path: Output file path
        payload: Python object to serialize as JSON
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, ensure_ascii=True, indent=2) + "\n",
        encoding="utf-8",
    )


def _create_run_dir(config, source_path, payload):
    """Deterministic run directory: <file-stem>-<content digest>."""
    digest = sha256(
        json.dumps(payload, sort_keys=True, ensure_ascii=True).encode("utf-8")
    ).hexdigest()[:12]
    dir_name = f"{slugify(Path(source_path).stem)[:60]}-{digest}"
    run_dir = Path(config["run_root"]) / dir_name
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def load_model(path):
    """Read and validate a model document.

    Returns:
        (payload dict, ModelDocument, operator, metric)

    Raises:
        DocumentError: unreadable file or any load-time invariant violated
    """
    payload = _read_json(path)
    document, operator, metric = validate_model(payload)
    return payload, document, operator, metric


def _resolve_order(config, document, order):
    if order is not None:
        return order
    if document.options.order is not None:
        return document.options.order
    return config["default_order"]


def run_realize(config, model_path, output=None, report_path=None, check_only=False, order=None):
    """Realize a model document and verify the result.

    Steps:
    1. Load and validate the model (operator identities, metric shape,
       symmetry, signature, normal form at 0)
    2. Normalize coordinates and build the orthonormal frame
    3. Run the correction loop
    4. Run the verifier suite
    5. Write christoffel.json and report.json

    Args:
        config: Pipeline configuration dict
        model_path: Path to the model document
        output: Run directory override
        report_path: Report file override
        check_only: Stop after validation
        order: Order N override

    Returns:
        PipelineResult with the written paths and the suite outcome
    """
    print(f"[PIPELINE] Loading model: {model_path}", flush=True)
    payload, document, operator, metric = load_model(model_path)
    order = _resolve_order(config, document, order)

    verdict = validate_normal_form(metric)
    print(
        f"[PIPELINE] Normal form: value_normalized={verdict['value_normalized']}, "
        f"first_order_flat={verdict['first_order_flat']}",
        flush=True,
    )
    if not verdict["value_normalized"]:
        raise NormalFormError(f"metric value at 0 is not diag(eps); {NORMAL_FORM_HINT}")
    if check_only:
        print("[PIPELINE] Check-only: model is valid, skipping realization", flush=True)
        return PipelineResult(run_dir=None, outputs={}, passed=True)

    run_dir = Path(output) if output else _create_run_dir(config, model_path, payload)
    run_dir.mkdir(parents=True, exist_ok=True)
    print(f"[PIPELINE] Run directory: {run_dir}", flush=True)

    print(f"[PIPELINE] Step 1: Normalizing coordinates at order N={order}", flush=True)
    coordinates = prepare_coordinates(metric, order)
    coordinate_map, normalized, frame = coordinates

    print("[PIPELINE] Step 2: Realizing", flush=True)
    gamma, report = realize(
        operator,
        metric,
        order,
        sample_radius=config["sample_radius"],
        verbose=True,
        coordinates=coordinates,
    )

    print("[PIPELINE] Step 3: Verification", flush=True)
    verdicts = verify_realization(
        gamma, operator, normalized, frame, fd_step=config["fd_step"]
    )
    report.verdicts = verdicts
    report.verified_degree = order - 1
    report.passed = suite_passed(verdicts)

    christoffel_path = run_dir / "christoffel.json"
    _write_json(christoffel_path, christoffel_to_document(gamma, coordinate_map).model_dump())
    report_path = Path(report_path) if report_path else run_dir / "report.json"
    _write_json(report_path, report.model_dump())
    print(f"[PIPELINE] Christoffel document saved: {christoffel_path}", flush=True)
    print(f"[PIPELINE] Report saved: {report_path}", flush=True)

    return PipelineResult(
        run_dir=run_dir,
        outputs={"christoffel": christoffel_path, "report": report_path},
        passed=report.passed,
    )


def run_check(config, christoffel_path, model_path, output=None):
    """Re-verify a stored Christoffel document against its model.

    The normalized metric and frame are re-derived from the model, so the
    check sees exactly the coordinates the realization was written in.
    """
    print(f"[PIPELINE] Loading model: {model_path}", flush=True)
    _, _, operator, metric = load_model(model_path)
    print(f"[PIPELINE] Loading Christoffel document: {christoffel_path}", flush=True)
    payload, gamma_document, gamma, _ = _load_christoffel(christoffel_path)
    if gamma.dim != operator.dim:
        raise ShapeError(
            f"Christoffel field has m={gamma.dim} but the model has m={operator.dim}"
        )
    order = gamma.degree_cap - 1
    if order < 2:
        raise DocumentError(f"Christoffel degree cap {gamma.degree_cap} is below 3")

    _, normalized, frame = prepare_coordinates(metric, order)
    verdicts = verify_realization(
        gamma, operator, normalized, frame, fd_step=config["fd_step"]
    )
    passed = suite_passed(verdicts)

    if output:
        verdict_path = Path(output)
    else:
        verdict_path = _create_run_dir(config, christoffel_path, payload) / "verdicts.json"
    _write_json(verdict_path, VerdictDocument(passed=passed, verdicts=verdicts).model_dump())
    print(f"[PIPELINE] Verdicts saved: {verdict_path}", flush=True)
    return PipelineResult(
        run_dir=verdict_path.parent, outputs={"verdicts": verdict_path}, passed=passed
    )


def _load_christoffel(path):
    payload = _read_json(path)
    document, gamma, coordinate_map = validate_christoffel(payload)
    return payload, document, gamma, coordinate_map


def run_classify(config, model_path, output=None):
    """Classification flags plus rho, rho_a, rho_s, rho_0 and tau of A."""
    print(f"[PIPELINE] Loading model: {model_path}", flush=True)
    payload, document, operator, metric = load_model(model_path)
    inner = metric.value_at_origin()

    flags = classify(operator, inner)
    pattern = flags.pop("ricci_pattern")
    rho = ricci(operator)
    antisymmetric, symmetric = ricci_split(rho)
    tau = scalar_curvature(operator, inner)
    classification = ClassificationDocument(
        dim=document.dim,
        signature=list(document.signature),
        flags=flags,
        ricci_pattern=pattern,
        ricci=form_rows(rho),
        ricci_antisymmetric=form_rows(antisymmetric),
        ricci_symmetric=form_rows(symmetric),
        trace_free_ricci=form_rows(trace_free_ricci(operator, inner)),
        scalar_curvature=format_rational(tau),
    )

    for name, value in flags.items():
        print(f"[PIPELINE] {name}: {value}", flush=True)
    present = [name for name, value in pattern.items() if value] or ["none"]
    print(f"[PIPELINE] Ricci components present: {', '.join(present)}", flush=True)
    print(f"[PIPELINE] tau = {format_rational(tau)}", flush=True)

    if output:
        path = Path(output)
    else:
        path = _create_run_dir(config, model_path, payload) / "classification.json"
    _write_json(path, classification.model_dump())
    print(f"[PIPELINE] Classification saved: {path}", flush=True)
    return PipelineResult(run_dir=path.parent, outputs={"classification": path})


def _constrain_operator(operator, inner, options):
    """Project A with the Ricci splitting so the requested flags hold."""
    if options.get("projectively_flat"):
        antisymmetric, symmetric = ricci_split(ricci(operator))
        operator = sigma_s(symmetric) + sigma_a(antisymmetric)
    if options.get("ricci_symmetric"):
        antisymmetric, _ = ricci_split(ricci(operator))
        operator = operator - sigma_a(antisymmetric)
    if options.get("ricci_antisymmetric"):
        _, symmetric = ricci_split(ricci(operator))
        operator = operator - sigma_s(symmetric)
    if options.get("traceless"):
        tau = scalar_curvature(operator, inner)
        operator = operator - sigma_s(inner.form.scaled(tau / operator.dim))
    return operator


def build_random_model(dim, signature, seed, order, options=None):
    """Deterministic random ModelDocument.

    Args:
        dim: m >= 3
        signature: (p, q) with p + q = m
        seed: RNG seed shared by the operator and the metric perturbation
        order: order N recorded in the document options
        options: flags projectively_flat, ricci_symmetric,
            ricci_antisymmetric, traceless, curved_metric
    """
    options = options or {}
    if sum(signature) != dim:
        raise ShapeError(f"signature {tuple(signature)} does not fit m={dim}")
    inner = InnerProduct.normalized(signature)
    operator = _constrain_operator(random_aco(seed, dim), inner, options)

    if options.get("curved_metric"):
        metric = metric_to_document(random_metric(seed, signature, order + 1))
    else:
        metric = form_rows(inner.form)

    return ModelDocument(
        dim=dim,
        signature=list(signature),
        metric=metric,
        operator=operator_to_entries(operator),
        options=ModelOptions(order=order, seed=seed),
    )


def run_random_model(config, dim, signature, seed, order=None, options=None, output=None):
    """Write a random model document; the same arguments give the same bytes."""
    order = order if order is not None else config["default_order"]
    print(
        f"[PIPELINE] Random model: m={dim}, signature={tuple(signature)}, seed={seed}, N={order}",
        flush=True,
    )
    document = build_random_model(dim, signature, seed, order, options)
    flags = sorted(name for name, value in (options or {}).items() if value)
    if output:
        path = Path(output)
    else:
        suffix = "".join(f"-{slugify(name)}" for name in flags)
        path = Path(config["run_root"]) / f"random-m{dim}-s{seed}{suffix}.json"
    _write_json(path, document.model_dump())
    print(f"[PIPELINE] Model saved: {path}", flush=True)
    return PipelineResult(run_dir=path.parent, outputs={"model": path})
