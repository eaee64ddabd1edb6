"""
Experiment handler for qcslab.

This module provides the `experiment` sub-command: read a JSON config, apply
the command-line flags, run the sweep and write its outputs.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict

from qcslab.errors import ConfigError
from qcslab.handlers.responses import error_response, ok
from qcslab.models.experiment import ExperimentConfig
from qcslab.services.experiments import run_experiment

logger = logging.getLogger(__name__)


def load_config(path: str, paper_scale: bool = False, force: bool = False) -> ExperimentConfig:
    """
    Parse an experiment config file.

    Args:
        path: UTF-8 JSON file
        paper_scale: --paper-scale flag
        force: --force flag

    Returns:
        The validated ExperimentConfig
    """
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}")
    overrides = {'paper_scale': True if paper_scale else None, 'force': True if force else None}
    return ExperimentConfig.from_dict(data, **overrides)


def handle_experiment(config_path: str, out_dir: str, paper_scale: bool = False,
                      force: bool = False) -> Dict[str, Any]:
    """
    Run one experiment end to end.

    Returns:
        Handler response; the body summarizes the run and lists the written files
    """
    logger.info(f"[EXPERIMENT_HANDLER] config={config_path} out={out_dir} paper_scale={paper_scale} force={force}")
    try:
        cfg = load_config(config_path, paper_scale, force)
        table = run_experiment(cfg, Path(out_dir))
    except Exception as e:
        return error_response(e, "EXPERIMENT_HANDLER")

    records = table['records']
    body = {
        'experiment': cfg.experiment,
        'out_dir': out_dir,
        'trials': len(records),
        'failures': sum(record.failed for record in records),
        'slopes': {r: (fit['slope'] if fit else None) for r, fit in table['meta']['slopes'].items()},
        'wall_time': table['wall_time'],
        'files': table['paths'],
    }
    return ok(body)
