import json
from pathlib import Path

import jsonschema
import pytest

import stablecone as sc

ROOT = Path(__file__).resolve().parents[2]
CONFIGS = sorted((ROOT / "configs").glob("*.json"))


def test_version_and_kinds():
    assert sc.__version__ == "0.1.0"
    assert set(sc.experiment_kinds()) == {p.stem for p in CONFIGS}


def test_density_matches_oracle():
    assert sc.radial_density(sc.StableParams(1.5, 2), 1.0) == pytest.approx(0.063184557589447795, rel=1e-6)
    assert sc.radial_density(sc.StableParams(1.5, 1), 0.0) == pytest.approx(0.28735275145216445, rel=1e-12)


def test_green_and_kernel():
    p = sc.StableParams(1.5, 2)
    assert sc.green_halfspace(p, [0, 1], [0.5, 2]) == pytest.approx(0.14178695839219314, rel=1e-9)
    assert sc.green_halfline(0.7, 1.0, 3.0) == pytest.approx(0.26151347179331094, rel=1e-9)
    assert sc.poisson_ball_mass(p, 1.0, 0.5) == pytest.approx(1.0, abs=1e-8)
    assert sc.martin_halfspace(p, [3.0, 4.0]) == pytest.approx(4.0**0.75)


def test_bad_alpha_raises():
    with pytest.raises(ValueError):
        sc.StableParams(1.0, 2)


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_shipped_configs_validate(path):
    doc = json.loads(path.read_text())
    jsonschema.validate(doc, sc.load_schema())
    canonical = json.loads(sc.normalize_config(path.read_text()))
    jsonschema.validate(canonical, sc.load_schema())
    assert canonical["experiment"] == path.stem


def test_schema_and_parser_agree_on_rejections():
    schema = sc.load_schema()
    for bad in ({"experiment": "survival", "stable": {"alpha": 1.0}},
                {"experiment": "survival", "walk": {"repz": 10}},
                {"experiment": "warp"}):
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(bad, schema)
        with pytest.raises(sc.ConfigError):
            sc.normalize_config(json.dumps(bad))


def test_survival_curve_thread_independent():
    p = sc.StableParams(1.5, 2)
    a = sc.survival_curve(p, 1.5707963267948966, [0, 1], [16, 64], 20000, seed=4, threads=1)
    b = sc.survival_curve(p, 1.5707963267948966, [0, 1], [16, 64], 20000, seed=4, threads=2)
    assert a["survivors"] == b["survivors"]
    assert a["survivors"][1] <= a["survivors"][0]


def test_run_experiment_writes_verifiable_outputs(tmp_path):
    cfg = {"experiment": "survival", "seed": 9, "walk": {"reps": 5000, "horizons": [16, 32, 64]}}
    res = sc.run_experiment(cfg, tmp_path)
    assert res["kind"] == "survival"
    assert res["all_passed"]
    names = {o["path"] for o in res["outputs"]}
    assert {"config.json", "survival.csv", "summary.json"} <= names
    assert sc.verify_manifest(str(tmp_path / "manifest.json")) == []
    header = (tmp_path / "survival.csv").read_text().splitlines()[0]
    assert header.startswith("n,")
