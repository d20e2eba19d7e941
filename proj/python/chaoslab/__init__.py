"""Mean-field Gibbs measures, exact Curie-Weiss marginals and chaos bounds."""

import json

from ._core import (
    ChaoslabError,
    Model,
    chaos_bounds,
    constants,
    coulomb_model,
    critical_coupling,
    curie_weiss_model,
    entropy_levels,
    fixed_point,
    gaussian_entropy_oracle,
    gaussian_model,
    jw_log_mgf,
    jw_rhs,
    magnetization,
    marginal_log_density,
    read_samples,
    run_chain,
    sample_marginal,
)
from ._core import run_experiment as _run_experiment

__all__ = [
    "ChaoslabError",
    "Model",
    "chaos_bounds",
    "constants",
    "coulomb_model",
    "critical_coupling",
    "curie_weiss_model",
    "entropy_levels",
    "fixed_point",
    "gaussian_entropy_oracle",
    "gaussian_model",
    "jw_log_mgf",
    "jw_rhs",
    "magnetization",
    "marginal_log_density",
    "read_samples",
    "run_chain",
    "run_experiment",
    "sample_marginal",
]


def run_experiment(config, output_dir="", threads=0):
    """Run a pipeline. `config` is a dict or a JSON string; returns the report dict."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_run_experiment(text, str(output_dir), threads))
