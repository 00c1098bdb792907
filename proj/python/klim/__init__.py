"""Kinetic SDE simulation and limit-theorem verification."""

import json

from . import _core
from ._core import Error, ExplosionError, PreconditionError, phi, phi_inverse, power_time_gap

__all__ = [
    "Error",
    "ExplosionError",
    "PreconditionError",
    "classify_regime",
    "default_config",
    "drift",
    "explosion_verdict",
    "invariant_cdf",
    "normalize_config",
    "phi",
    "phi_inverse",
    "power_time_gap",
    "run_suite",
    "sample_invariant",
    "simulate",
]


def _dump(obj):
    return json.dumps(obj)


def classify_regime(model):
    """Return (regime, q) for a model dict."""
    return _core.classify_regime(_dump(model))


def explosion_verdict(model):
    return _core.explosion_verdict(_dump(model))


def drift(model, v):
    return _core.drift(_dump(model), v)


def default_config(suite):
    return json.loads(_core.default_config(suite))


def normalize_config(config):
    """Fill defaults and validate; raises PreconditionError naming the bad field."""
    return json.loads(_core.normalize_config(_dump(config)))


def run_suite(suite, config=None, threads=0):
    """Run a verification suite and return its report as a dict."""
    if config is None:
        config = default_config(suite)
    return json.loads(_core.run_suite(suite, _dump(config), threads))


def simulate(config, threads=0):
    """Simulate paths; returns dict with t (n_times,), v and x (n_paths, n_times), exploded (n_paths,)."""
    return _core.simulate(_dump(config), threads)


def sample_invariant(family, model, n, seed=20261019, threads=0):
    """Draw n samples from the 'lambda' or 'pi' invariant law of the model's drift."""
    return _core.sample_invariant(family, _dump(model), n, seed, threads)


def invariant_cdf(family, model, x):
    return _core.invariant_cdf(family, _dump(model), x)
