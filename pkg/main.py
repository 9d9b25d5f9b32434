"""CLI Entry Point for the curvature realizer.

This script provides the command-line interface for realizing a
generalized algebraic curvature operator by a torsion-free connection
with constant scalar curvature, verifying stored realizations, and
generating reproducible random models.

Usage:
    python main.py random-model --dim 3 --signature 0,3 --seed 7 --output model.json
    python main.py realize model.json --order 4
    python main.py check runs/model-<digest>/christoffel.json model.json
    python main.py classify model.json

Exit status:
    0 success, 2 usage error, 3 invalid input, 4 verification failed,
    5 internal invariant violated

Environment Variables:
    See .env.example
"""

import argparse
import os
from pathlib import Path

from dotenv import load_dotenv

from core.errors import (
    EXIT_INTERNAL,
    EXIT_OK,
    EXIT_VALIDATION,
    EXIT_VERIFICATION,
    ConfigError,
    InvariantViolation,
)
from core.pipeline import run_check, run_classify, run_random_model, run_realize
from services.codec import parse_rational
from services.jetcalc import format_rational


def _signature(text):
    try:
        p, q = (int(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"signature must be 'p,q', got {text!r}") from exc
    if p < 0 or q < 0:
        raise argparse.ArgumentTypeError("signature entries must be non-negative")
    return p, q


def _env_rational(name, default):
    text = os.getenv(name, default)
    try:
        value = parse_rational(text, name)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if value <= 0:
        raise ConfigError(f"{name} must be positive, got {text!r}")
    return value


def build_config(args):
    """Merge CLI arguments with REALIZER_* environment settings."""
    load_dotenv()
    order_text = os.getenv("REALIZER_DEFAULT_ORDER", "4")
    try:
        default_order = int(order_text)
    except ValueError as exc:
        raise ConfigError(f"REALIZER_DEFAULT_ORDER: {order_text!r} is not an integer") from exc
    if default_order < 2:
        raise ConfigError(f"REALIZER_DEFAULT_ORDER must be >= 2, got {default_order}")
    return {
        "run_root": args.run_root or Path(os.getenv("REALIZER_RUN_ROOT", "runs")),
        "default_order": default_order,
        "sample_radius": _env_rational("REALIZER_SAMPLE_RADIUS", "1/2"),
        "fd_step": _env_rational("REALIZER_FD_STEP", "1/100"),
    }


def build_parser():
    """Build and configure the argument parser.

    Returns:
        Configured ArgumentParser instance
    """
    parser = argparse.ArgumentParser(
        description="Realize curvature operators by torsion-free connections on exact jets.",
    )
    parser.add_argument(
        "--run-root",
        type=Path,
        default=None,
        help="Directory where run artifacts are written (default: $REALIZER_RUN_ROOT or runs).",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    realize = commands.add_parser("realize", help="Realize a model and verify the result")
    realize.add_argument("model", type=Path, help="Model document (JSON)")
    realize.add_argument("--order", type=int, default=None, help="Curvature order N (>= 2)")
    realize.add_argument("--output", type=Path, default=None, help="Run directory")
    realize.add_argument("--report", type=Path, default=None, help="Report file path")
    realize.add_argument(
        "--check-only",
        action="store_true",
        help="Validate the model document and stop",
    )

    check = commands.add_parser("check", help="Re-verify a stored Christoffel document")
    check.add_argument("christoffel", type=Path, help="Christoffel document (JSON)")
    check.add_argument("model", type=Path, help="Model document it realizes")
    check.add_argument("--output", type=Path, default=None, help="Verdict file path")

    classify = commands.add_parser("classify", help="Classify the model's operator")
    classify.add_argument("model", type=Path, help="Model document (JSON)")
    classify.add_argument("--output", type=Path, default=None, help="Classification file path")

    random_model = commands.add_parser("random-model", help="Write a random model document")
    random_model.add_argument("--dim", type=int, default=3, help="Dimension m (>= 3)")
    random_model.add_argument(
        "--signature",
        type=_signature,
        default=None,
        help="Signature p,q (p timelike directions); default 0,m",
    )
    random_model.add_argument("--seed", type=int, default=0, help="RNG seed")
    random_model.add_argument("--order", type=int, default=None, help="Order N stored in the document")
    random_model.add_argument("--output", type=Path, default=None, help="Model file path")
    random_model.add_argument("--ricci-symmetric", action="store_true", help="Force rho_a(A) = 0")
    random_model.add_argument("--ricci-antisymmetric", action="store_true", help="Force rho_s(A) = 0")
    random_model.add_argument("--traceless", action="store_true", help="Force tau(A) = 0")
    random_model.add_argument(
        "--projectively-flat",
        action="store_true",
        help="Drop the Weyl projective component of A",
    )
    random_model.add_argument(
        "--curved-metric",
        action="store_true",
        help="Add a random degree-2 perturbation to the metric",
    )
    return parser


def _dispatch(config, args):
    if args.command == "realize":
        result = run_realize(
            config,
            args.model,
            output=args.output,
            report_path=args.report,
            check_only=args.check_only,
            order=args.order,
        )
    elif args.command == "check":
        result = run_check(config, args.christoffel, args.model, output=args.output)
    elif args.command == "classify":
        result = run_classify(config, args.model, output=args.output)
    else:
        signature = args.signature or (0, args.dim)
        options = {
            "ricci_symmetric": args.ricci_symmetric,
            "ricci_antisymmetric": args.ricci_antisymmetric,
            "traceless": args.traceless,
            "projectively_flat": args.projectively_flat,
            "curved_metric": args.curved_metric,
        }
        result = run_random_model(
            config,
            args.dim,
            signature,
            args.seed,
            order=args.order,
            options=options,
            output=args.output,
        )

    for name, path in result.outputs.items():
        print(f"{name.capitalize()}: {path}")
    if result.passed is False:
        return EXIT_VERIFICATION
    return EXIT_OK


def main(argv=None):
    """Main CLI entry point.

    Parses arguments, builds config, and runs the requested command.
    Returns the process exit status.
    """
    args = build_parser().parse_args(argv)

    try:
        config = build_config(args)
    except ConfigError as exc:
        print(f"[CLI] Config error: {exc}", flush=True)
        return EXIT_VALIDATION

    # Log configuration
    print(
        "[CLI] Config:"
        f" command={args.command}"
        f", run_root={config['run_root']}"
        f", default_order={config['default_order']}"
        f", sample_radius={format_rational(config['sample_radius'])}"
        f", fd_step={format_rational(config['fd_step'])}",
        flush=True,
    )

    try:
        return _dispatch(config, args)
    except InvariantViolation as exc:
        print(f"[CLI] Internal error: {exc}", flush=True)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"[CLI] Error: {exc}", flush=True)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
