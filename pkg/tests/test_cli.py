import json
import subprocess
import sys
from pathlib import Path

import pytest

from anxeeg.classify.serialize import load_model
from anxeeg.cli import main
from anxeeg.config import STAGE_ORDER, load_config, parse_config
from anxeeg.errors import ConfigError
from anxeeg.synthetic import FIXTURE_CONFIG, write_fixture


def _tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*"))
            if p.is_file()}


@pytest.fixture(scope="module")
def fixture_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("fixture")
    cfg = write_fixture(root)["config"]
    codes = [main(["--config", str(cfg), "--stage", "all", "--out", str(root / name)])
             for name in ("run1", "run2")]
    return root, cfg, codes


def test_full_pipeline_succeeds(fixture_runs):
    root, _, codes = fixture_runs
    assert codes == [0, 0]
    for stage in STAGE_ORDER:
        assert (root / "run1" / stage / "stage.json").exists()


def test_runs_are_byte_identical(fixture_runs):
    root, _, _ = fixture_runs
    a, b = _tree(root / "run1"), _tree(root / "run2")
    assert a.keys() == b.keys()
    assert [k for k in a if a[k] != b[k]] == []


def test_report_dimensions(fixture_runs):
    root, _, _ = fixture_runs
    rep = json.loads((root / "run1" / "evaluate" / "report.json").read_text())
    assert rep["fingerprint"]["dimensions"] == {"hjorth": 42, "power": 56, "rms": 56}
    assert rep["fingerprint"]["n_features"] == 154
    assert sum(rep["fold_sizes"]) == 2 * 6 * 30


def test_fixture_is_learnable(fixture_runs):
    root, _, _ = fixture_runs
    rep = json.loads((root / "run1" / "evaluate" / "report.json").read_text())
    assert rep["mean_accuracy"] > 0.9


def test_rerun_evaluate_is_idempotent(fixture_runs):
    root, cfg, _ = fixture_runs
    out = root / "run1"
    before = (out / "evaluate" / "report.json").read_bytes()
    assert main(["--config", str(cfg), "--stage", "evaluate", "--out", str(out)]) == 0
    assert (out / "evaluate" / "report.json").read_bytes() == before


def test_trained_model_loads(fixture_runs):
    root, _, _ = fixture_runs
    model, fp = load_model(root / "run1" / "train" / "model.npz")
    assert fp["model"]["kind"] == "knn" and fp["n_features"] == 154
    assert model.X.shape[1] == 154


def test_summary_lists_manifest(fixture_runs):
    root, _, _ = fixture_runs
    text = (root / "run1" / "report" / "summary.txt").read_text()
    assert "[all]\tall\t277" in text and "mean CV" in text


def test_extract_before_preprocess(tmp_path, capsys):
    cfg = write_fixture(tmp_path)["config"]
    rc = main(["--config", str(cfg), "--stage", "extract", "--out", str(tmp_path / "o")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "missing stage artifact" in err and "error=missing_stage_artifact" in err


def test_changed_settings_make_artifacts_stale(fixture_runs, capsys):
    root, cfg, _ = fixture_runs
    rc = main(["--config", str(cfg), "--stage", "evaluate", "--out", str(root / "run2"),
               "--duration", "5"])
    assert rc == 2
    assert "error=stale_stage_artifact" in capsys.readouterr().err


def test_seed_override_changes_fingerprint(tmp_path):
    cfg = load_config(write_fixture(tmp_path)["config"])
    assert cfg.with_overrides(seed=8).stage_fingerprint("evaluate") != \
        cfg.stage_fingerprint("evaluate")
    # upstream stages do not consume the seed
    assert cfg.with_overrides(seed=8).stage_fingerprint("extract") == \
        cfg.stage_fingerprint("extract")


def test_fingerprints_follow_dependencies(tmp_path):
    cfg = load_config(write_fixture(tmp_path)["config"])
    other = cfg.with_overrides(duration=5.0)
    assert other.stage_fingerprint("label") == cfg.stage_fingerprint("label")
    assert other.stage_fingerprint("extract") != cfg.stage_fingerprint("extract")
    assert other.stage_fingerprint("report") != cfg.stage_fingerprint("report")


def test_training_needs_seed(tmp_path, capsys):
    write_fixture(tmp_path)
    ini = tmp_path / "noseed.ini"
    ini.write_text(FIXTURE_CONFIG.replace("seed = 7", ""))
    assert main(["--config", str(ini), "--stage", "evaluate"]) == 2
    assert "needs a seed" in capsys.readouterr().err


def test_missing_input(tmp_path, capsys):
    ini = tmp_path / "p.ini"
    ini.write_text("[input]\nrecordings = nope.edf\n")
    assert main(["--config", str(ini), "--stage", "ingest"]) == 2
    assert "does not exist" in capsys.readouterr().err


def test_bad_flag_values(tmp_path):
    with pytest.raises(SystemExit):
        main(["--config", "x.ini", "--stage", "all", "--duration", "7"])
    with pytest.raises(SystemExit):
        main(["--config", "x.ini", "--stage", "nonsense"])


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "anxeeg", "--config", str(tmp_path / "none.ini"),
                           "--stage", "ingest"], capture_output=True, text=True)
    assert proc.returncode == 2 and "config file not found" in proc.stderr


def test_parse_fixture_config():
    cfg = parse_config(FIXTURE_CONFIG)
    assert cfg.features == ("hjorth", "power", "rms")
    assert cfg.classifier == {"kind": "knn", "k": 5}
    assert cfg.levels == 2 and cfg.seed == 7 and cfg.filter.num_taps == 129


def test_classifier_values_are_typed():
    cfg = parse_config("[classifier]\nkind = ssae\nsizes = 20-10\nbeta = 3.0\n")
    assert cfg.classifier == {"kind": "ssae", "sizes": [20, 10], "beta": 3.0}


@pytest.mark.parametrize("text, msg", [
    ("[bogus]\nx = 1\n", "unknown config sections"),
    ("[classifier]\nk = 5\n", "needs a kind"),
    ("[run]\nseed = -1\n", "unsigned 64-bit"),
    ("[trials]\nduration = one\n", "expected float"),
    ("not an ini", "malformed"),
])
def test_config_errors(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text)


@pytest.mark.parametrize("override, msg", [({"duration": 2.0}, "duration"),
                                           ({"levels": 3}, "levels"),
                                           ({"split": "loso"}, "split")])
def test_config_validation(override, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(FIXTURE_CONFIG).with_overrides(**override).validate("extract")


def test_deterministic_fixture_files(tmp_path):
    a = write_fixture(tmp_path / "a")
    b = write_fixture(tmp_path / "b")
    assert (tmp_path / "a" / "S01.edf").read_bytes() == (tmp_path / "b" / "S01.edf").read_bytes()
    assert a["ratings"].read_text() == b["ratings"].read_text()
