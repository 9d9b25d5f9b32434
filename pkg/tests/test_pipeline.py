import json

import pytest

import core.pipeline
from core.errors import (
    EXIT_INTERNAL,
    EXIT_OK,
    EXIT_VALIDATION,
    EXIT_VERIFICATION,
    InvariantViolation,
    NormalFormError,
)
from main import main
from services.codec import christoffel_to_document, validate_christoffel
from services.jetcalc import Jet
from services.realizer import ChristoffelField
from tests.conftest import model_payload, write_model


def random_model(run_config, tmp_path, seed=1, order=3, **options):
    path = tmp_path / f"model-{seed}.json"
    core.pipeline.run_random_model(run_config, 3, (0, 3), seed, order, options, path)
    return path


def read(path):
    return json.loads(path.read_text(encoding="utf-8"))


def tamper(christoffel_path, target):
    _, gamma, coordinate_map = validate_christoffel(read(christoffel_path))
    x1 = Jet.variable(gamma.dim, gamma.degree_cap, 1)
    entries = dict(gamma.entries)
    for idx in ((1, 2, 3), (2, 1, 3)):
        entries[idx] = entries[idx] + x1
    tampered = ChristoffelField(gamma.dim, gamma.degree_cap, entries)
    target.write_text(
        json.dumps(christoffel_to_document(tampered, coordinate_map).model_dump(), indent=2),
        encoding="utf-8",
    )
    return target


def test_slugify():
    assert core.pipeline.slugify("My Model (v2).json") == "my-model-v2-json"
    assert core.pipeline.slugify("???") == "model"


def test_random_model_is_deterministic(run_config, tmp_path):
    first = random_model(run_config, tmp_path / "a")
    second = random_model(run_config, tmp_path / "b")
    assert first.read_bytes() == second.read_bytes()
    other = random_model(run_config, tmp_path / "c", seed=2)
    assert other.read_bytes() != first.read_bytes()


def test_random_model_default_path(run_config):
    result = core.pipeline.run_random_model(
        run_config, 3, (1, 2), 4, options={"traceless": True, "ricci_symmetric": True}
    )
    expected = run_config["run_root"] / "random-m3-s4-ricci-symmetric-traceless.json"
    assert result.outputs["model"] == expected
    assert read(expected)["options"] == {"order": 4, "seed": 4}


@pytest.mark.parametrize(
    "flag, key",
    [
        ("ricci_symmetric", "ricci_symmetric"),
        ("ricci_antisymmetric", "ricci_antisymmetric"),
        ("traceless", "ricci_traceless"),
        ("projectively_flat", "projectively_flat"),
    ],
)
def test_random_model_flags_hold(run_config, tmp_path, flag, key):
    model = random_model(run_config, tmp_path, **{flag: True})
    result = core.pipeline.run_classify(run_config, model, tmp_path / "classification.json")
    classification = read(result.outputs["classification"])
    assert classification["flags"][key]


def test_curved_metric_model(run_config, tmp_path):
    model = random_model(run_config, tmp_path, curved_metric=True)
    metric = read(model)["metric"]
    assert metric["degree_cap"] == 4
    assert any(
        sum(term["exponents"]) == 2 for entry in metric["entries"] for term in entry["jet"]
    )


def test_realize_then_check(run_config, tmp_path):
    model = random_model(run_config, tmp_path)
    result = core.pipeline.run_realize(run_config, model)
    assert result.passed
    report = read(result.outputs["report"])
    assert report["kind"] == "realization_report"
    assert report["converged"]
    assert report["verified_degree"] == 2
    assert report["christoffel_cap"] == 4
    assert report["iterations"][-1]["theta_valuation"] is None
    assert all(verdict["passed"] or not verdict["applicable"] for verdict in report["verdicts"])
    assert all(
        verdict["passed"] is None for verdict in report["verdicts"] if not verdict["applicable"]
    )

    checked = core.pipeline.run_check(run_config, result.outputs["christoffel"], model)
    assert checked.passed
    verdicts = read(checked.outputs["verdicts"])
    assert verdicts["passed"]
    assert {v["name"] for v in verdicts["verdicts"]} >= {
        "realization_at_origin",
        "constant_scalar_curvature",
        "ricci_antisymmetric_part",
        "ricci_symmetric_part",
        "finite_difference_oracle",
    }


def test_realize_is_byte_reproducible(run_config, tmp_path):
    model = random_model(run_config, tmp_path, seed=3)
    first = core.pipeline.run_realize(run_config, model)
    christoffel = first.outputs["christoffel"].read_bytes()
    report = first.outputs["report"].read_bytes()
    second = core.pipeline.run_realize(run_config, model)
    assert second.run_dir == first.run_dir
    assert second.outputs["christoffel"].read_bytes() == christoffel
    assert second.outputs["report"].read_bytes() == report


def test_realize_with_curved_metric(run_config, tmp_path):
    model = random_model(run_config, tmp_path, seed=5, curved_metric=True)
    result = core.pipeline.run_realize(run_config, model, output=tmp_path / "run")
    assert result.passed
    report = read(result.outputs["report"])
    assert report["normal_form"]["value_normalized"]
    assert report["second_order_frame"]
    assert core.pipeline.run_check(run_config, result.outputs["christoffel"], model).passed


def test_order_flag_overrides_document(run_config, tmp_path):
    model = random_model(run_config, tmp_path, order=4)
    result = core.pipeline.run_realize(run_config, model, output=tmp_path / "run", order=2)
    assert read(result.outputs["report"])["order"] == 2


def test_check_only_writes_nothing(run_config, tmp_path):
    model = random_model(run_config, tmp_path)
    result = core.pipeline.run_realize(run_config, model, check_only=True)
    assert result.passed
    assert result.outputs == {}
    assert not run_config["run_root"].exists()


def test_non_normalized_metric_is_rejected(run_config, tmp_path, single_component_operator):
    payload = model_payload(single_component_operator, signature=(1, 2))
    payload["metric"] = [["1", "0", "0"], ["0", "-1", "0"], ["0", "0", "1"]]
    model = write_model(tmp_path / "swapped.json", payload)
    with pytest.raises(NormalFormError, match="diag"):
        core.pipeline.run_realize(run_config, model)


def test_tampered_christoffel_fails_check(run_config, tmp_path):
    model = random_model(run_config, tmp_path)
    result = core.pipeline.run_realize(run_config, model)
    tampered = tamper(result.outputs["christoffel"], tmp_path / "tampered.json")
    checked = core.pipeline.run_check(run_config, tampered, model, tmp_path / "verdicts.json")
    assert checked.passed is False
    verdicts = {v["name"]: v for v in read(tmp_path / "verdicts.json")["verdicts"]}
    assert not verdicts["realization_at_origin"]["passed"]


def test_classify_single_component(run_config, tmp_path, single_component_operator):
    model = write_model(tmp_path / "single.json", model_payload(single_component_operator))
    result = core.pipeline.run_classify(run_config, model)
    classification = read(result.outputs["classification"])
    assert classification["flags"]["ricci_symmetric"]
    assert not classification["flags"]["ricci_antisymmetric"]
    assert classification["scalar_curvature"] == "-1"
    assert classification["ricci"][0] == ["-1", "0", "0"]
    assert classification["ricci_pattern"]["antisymmetric"] is False


def test_main_exit_codes(tmp_path, single_component_operator, monkeypatch):
    for name in ("REALIZER_RUN_ROOT", "REALIZER_DEFAULT_ORDER"):
        monkeypatch.delenv(name, raising=False)
    root = ["--run-root", str(tmp_path / "runs")]
    model = write_model(tmp_path / "single.json", model_payload(single_component_operator, order=3))
    assert main(root + ["realize", str(model)]) == EXIT_OK

    bad = model_payload(single_component_operator)
    bad["operator"][0]["value"] = "0.5"
    bad_model = write_model(tmp_path / "bad.json", bad)
    assert main(root + ["realize", str(bad_model)]) == EXIT_VALIDATION
    assert main(root + ["realize", str(tmp_path / "missing.json")]) == EXIT_VALIDATION
    assert main(root + ["realize", str(model), "--order", "1"]) == EXIT_VALIDATION

    run = tmp_path / "run"
    assert main(root + ["realize", str(model), "--output", str(run)]) == EXIT_OK
    tampered = tamper(run / "christoffel.json", tmp_path / "tampered.json")
    assert main(root + ["check", str(tampered), str(model)]) == EXIT_VERIFICATION

    with pytest.raises(SystemExit) as excinfo:
        main(root + ["random-model", "--signature", "x"])
    assert excinfo.value.code == 2


def test_main_reports_invariant_violations(tmp_path, single_component_operator, monkeypatch):
    def broken(*args, **kwargs):
        raise InvariantViolation("Theta recursion identity failed at iteration 2")

    monkeypatch.setattr(core.pipeline, "realize", broken)
    model = write_model(tmp_path / "single.json", model_payload(single_component_operator))
    assert main(["--run-root", str(tmp_path), "realize", str(model)]) == EXIT_INTERNAL


def test_main_random_model_and_classify(tmp_path, capsys):
    model = tmp_path / "model.json"
    argv = ["random-model", "--dim", "4", "--signature", "1,3", "--seed", "2", "--output", str(model)]
    assert main(argv) == EXIT_OK
    assert read(model)["signature"] == [1, 3]
    assert main(["classify", str(model), "--output", str(tmp_path / "c.json")]) == EXIT_OK
    assert "[CLI] Config: command=classify" in capsys.readouterr().out


def test_realize_normalizes_coordinates_once(run_config, tmp_path, capsys):
    model = random_model(run_config, tmp_path, seed=6, curved_metric=True)
    capsys.readouterr()
    core.pipeline.run_realize(run_config, model, output=tmp_path / "run")
    out = capsys.readouterr().out
    assert out.count("[FRAME]") == 1
    assert out.count("[NORMALIZE]") == 1


@pytest.mark.parametrize(
    "name, value",
    [
        ("REALIZER_DEFAULT_ORDER", "four"),
        ("REALIZER_DEFAULT_ORDER", "1"),
        ("REALIZER_FD_STEP", "0.01"),
        ("REALIZER_FD_STEP", "-1/100"),
        ("REALIZER_SAMPLE_RADIUS", "1/0"),
    ],
)
def test_main_rejects_bad_environment(
    tmp_path, single_component_operator, monkeypatch, name, value
):
    monkeypatch.setenv(name, value)
    model = write_model(tmp_path / "single.json", model_payload(single_component_operator))
    assert main(["--run-root", str(tmp_path), "classify", str(model)]) == EXIT_VALIDATION
