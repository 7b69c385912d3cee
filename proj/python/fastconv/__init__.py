"""Python access to the fastconv engine and experiment runner."""

import json

import numpy as np

from ._core import (
    ConfigError,
    Convolution,
    Error,
    experiment_names,
    oracle_convolve,
    random_grid,
)

__all__ = [
    "ConfigError",
    "Convolution",
    "Error",
    "convolve",
    "counters",
    "experiment_names",
    "oracle_convolve",
    "preset",
    "random_grid",
    "run",
]


def preset(name):
    """Default configuration of a preset as a dict."""
    from ._core import preset_json

    return json.loads(preset_json(name))


def run(config):
    """Run an experiment from a config dict. Returns the manifest with an added exit_code."""
    from ._core import run_json

    code, manifest = run_json(json.dumps(config))
    manifest = json.loads(manifest)
    manifest["exit_code"] = code
    return manifest


def counters(engine):
    return json.loads(engine.counters_json)


def convolve(grid, samples, *, kernel="power", alpha=0.5, B=5, contour="fracrd"):
    """Scalar convolution on a grid starting at 0, h_min taken as the smallest step."""
    grid = np.asarray(grid, dtype=float)
    samples = np.asarray(samples, dtype=float)
    engine = Convolution(
        kernel=kernel, alpha=alpha, h_min=float(np.diff(grid).min()), B=B, horizon=float(grid[-1]), contour=contour
    )
    engine.start(samples[:1])
    u = np.zeros_like(grid)
    for n in range(1, len(grid)):
        u[n] = engine.evaluate(grid[n], samples[n : n + 1])[0]
    return u
