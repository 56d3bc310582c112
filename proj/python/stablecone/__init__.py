"""Random walks in cones with isotropic stable increments."""

import json
import os
from pathlib import Path

from ._stablecone import (
    ConfigError,
    QuadratureError,
    RejectionCapError,
    StableParams,
    __version__,
    ball_exit_radius_cdf,
    estimate_beta,
    experiment_kinds,
    green_halfline,
    green_halfspace,
    martin_halfspace,
    normalize_config,
    poisson_ball_mass,
    radial_density,
    survival_curve,
    verify_manifest,
)
from ._stablecone import run_experiment as _run_experiment

SCHEMA_PATH = Path(__file__).with_name("experiment.schema.json")


def load_schema():
    return json.loads(SCHEMA_PATH.read_text())


def run_experiment(config, out_dir=None, threads=1):
    """Run a config given as a dict, JSON text or a path to a JSON file."""
    if isinstance(config, dict):
        text = json.dumps(config)
    elif isinstance(config, os.PathLike) or (isinstance(config, str) and not config.lstrip().startswith("{")):
        text = Path(config).read_text()
    else:
        text = config
    if out_dir is None:
        out_dir = os.environ.get("STABLECONE_OUT_DIR", "stablecone-out")
    return _run_experiment(text, os.fspath(out_dir), threads)


__all__ = [
    "ConfigError",
    "QuadratureError",
    "RejectionCapError",
    "SCHEMA_PATH",
    "StableParams",
    "__version__",
    "ball_exit_radius_cdf",
    "estimate_beta",
    "experiment_kinds",
    "green_halfline",
    "green_halfspace",
    "load_schema",
    "martin_halfspace",
    "normalize_config",
    "poisson_ball_mass",
    "radial_density",
    "run_experiment",
    "survival_curve",
    "verify_manifest",
]
