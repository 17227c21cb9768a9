"""Graph Dirichlet partitions of point clouds."""

import json

from ._dirpart import (
    ConfigError,
    Error,
    InputError,
    NumericError,
    hausdorff,
    interval_dirichlet,
    interval_zaremba,
    normalize_config,
    partition,
    run_sweep,
    surface_tension,
    tl2,
)
from ._dirpart import sample as _sample

PRESETS = ("interval", "square", "disk", "flower")


def domain_json(domain):
    """Preset name, dict, or JSON text to the JSON domain description."""
    if isinstance(domain, dict):
        return json.dumps(domain)
    if domain in PRESETS:
        return json.dumps({"type": domain})
    return domain


def sample(domain, n, seed=0, margin=None):
    """Uniform samples; a margin grows the sampling region by that fraction of the diameter."""
    return _sample(domain_json(domain), n, seed, margin)


__all__ = [
    "ConfigError", "Error", "InputError", "NumericError", "domain_json", "hausdorff",
    "interval_dirichlet", "interval_zaremba", "normalize_config", "partition", "run_sweep",
    "sample", "surface_tension", "tl2",
]
