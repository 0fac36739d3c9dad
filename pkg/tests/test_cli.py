import json
import os

import pytest
import yaml

from activity_sos.constant.semantics import JOBS_ENV_VAR
from activity_sos.pipeline.cli import UsageError, build_parser, resolve_options, run
from support import MODELS_DIR, model_path


def test_validate_clean_model(capsys):
    assert run(["validate", model_path("fork")]) == 0
    assert capsys.readouterr().out == "model is well-formed\n"


def test_validate_reports_violations(tmp_path, capsys):
    document = tmp_path / "bad.yaml"
    document.write_text("activities:\n  - name: Main\n    nodes:\n      - {id: A, kind: Action}\n")
    assert run(["validate", str(document)]) == 1
    assert "action-no-input Main.A" in capsys.readouterr().out


def test_explore_to_file(tmp_path, capsys):
    out = tmp_path / "fork.json"
    assert run(["explore", model_path("fork"), "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert len(data["states"]) == 12
    assert "12 states, 15 transitions, 1 terminated" in capsys.readouterr().err


def test_explore_dot_to_stdout(capsys):
    assert run(["explore", model_path("fork"), "--format", "dot", "--mode", "complete"]) == 0
    assert capsys.readouterr().out.startswith("digraph kripke {")


def test_simulate_prints_trace(capsys):
    assert run(["simulate", model_path("timing"), "--profile", "exec-time", "--seed", "1"]) == 0
    assert capsys.readouterr().out.split() == ["t(init)", "i(A)", "exeTime(A)", "t(A)"]


def test_timing_file_enables_execution_time(tmp_path, capsys):
    timing = tmp_path / "timing.yaml"
    timing.write_text(yaml.safe_dump({"A": 0}))
    assert run(["simulate", model_path("timing"), "--timing", str(timing)]) == 0
    assert "exeTime(A)" in capsys.readouterr().out


def test_check_verdicts(tmp_path, capsys):
    verdict = tmp_path / "verdict.json"
    assert run(["check", model_path("compete"), "--abstract", "reference", "--concrete", "var1", "--out", str(verdict)]) == 0
    assert json.loads(verdict.read_text())["holds"] is True
    assert run(["check", model_path("compete"), "--concrete", "var2", "--hide-tau"]) == 1
    assert "simulation fails" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        ["explode", "model.yaml"],
        ["explore", "missing.yaml"],
        ["explore", "MODEL", "--profile", "turbo"],
        ["explore", "MODEL", "--max-states", "0"],
        ["explore", "MODEL", "--jobs", "0"],
        ["explore", "MODEL", "--jobs", "-1"],
        ["check", "MODEL", "--abstract", "reference", "--concrete", "reference", "--timing", "nowhere.yaml"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    argv = [model_path("fork") if a == "MODEL" else a for a in argv]
    assert run(argv) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_parse_error_exits_2(tmp_path):
    document = tmp_path / "broken.yaml"
    document.write_text("activities: [\n")
    assert run(["validate", str(document)]) == 2


def test_option_precedence(tmp_path, monkeypatch):
    config = tmp_path / "run.yaml"
    config.write_text(yaml.safe_dump({"jobs": 3, "seed": 9, "max-len": 5}))
    monkeypatch.setenv("ACTIVITY_SOS_JOBS", "2")
    parser = build_parser()

    options = resolve_options(parser.parse_args(["simulate", "m.yaml"]))
    assert options["jobs"] == 2 and options["seed"] == 0

    options = resolve_options(parser.parse_args(["simulate", "m.yaml", "--config", str(config)]))
    assert (options["jobs"], options["seed"], options["max_len"]) == (3, 9, 5)

    options = resolve_options(parser.parse_args(["simulate", "m.yaml", "--config", str(config), "--jobs", "1"]))
    assert options["jobs"] == 1


def test_unknown_config_key(tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text("colour: blue\n")
    with pytest.raises(UsageError):
        resolve_options(build_parser().parse_args(["validate", "m.yaml", "--config", str(config)]))


def test_jobs_default_to_available_cores(monkeypatch):
    monkeypatch.delenv(JOBS_ENV_VAR, raising=False)
    options = resolve_options(build_parser().parse_args(["explore", "m.yaml"]))
    assert options["jobs"] == (os.cpu_count() or 1)


@pytest.mark.parametrize("source", ["env", "config"])
def test_non_positive_jobs_rejected(source, tmp_path, monkeypatch):
    argv = ["explore", "m.yaml"]
    if source == "env":
        monkeypatch.setenv(JOBS_ENV_VAR, "0")
    else:
        config = tmp_path / "run.yaml"
        config.write_text("jobs: -2\n")
        argv += ["--config", str(config)]
    with pytest.raises(UsageError, match="jobs"):
        resolve_options(build_parser().parse_args(argv))


@pytest.mark.parametrize("name", sorted(os.path.splitext(f)[0] for f in os.listdir(MODELS_DIR) if f.endswith(".yaml")))
def test_output_independent_of_worker_count(name, tmp_path):
    outputs = []
    for jobs in ("1", "8"):
        out = tmp_path / f"{name}-{jobs}.json"
        assert run(["explore", model_path(name), "--jobs", jobs, "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
