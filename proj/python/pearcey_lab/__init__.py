"""Rigidity experiments for the Pearcey process.

Thin wrapper over the compiled ``_core`` module: closed-form scaling laws, the random
matrix ensemble, Pearcey kernel quadrature, rigidity statistics and the experiment
pipeline.
"""

import json

from ._core import *  # noqa: F401,F403
from ._core import BUILD_ID, ExperimentConfig, run_experiment as _run_experiment, sections

__version__ = "0.1.0"


def run(config=None, sections_mask=sections.DEFAULT, **overrides):
    """Run the pipeline and return ``(report_dict, tables)``.

    Keyword overrides use the config-file keys, e.g. ``run(trials=20, n=100)``.
    """
    cfg = config if config is not None else ExperimentConfig()
    for key, value in overrides.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(repr(float(v)) for v in value)
        cfg.set(key, str(value))
    text, tables = _run_experiment(cfg, sections_mask)
    return json.loads(text), tables
