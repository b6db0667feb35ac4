"""
Run Tracking Module
Logs run parameters, final diagnostics and output files to MLflow
"""

import logging
import os
from typing import Dict, Optional

import mlflow

logger = logging.getLogger(__name__)

DEFAULT_EXPERIMENT = "SWME DG Runs"


def configure_tracking(experiment_name: Optional[str] = None) -> str:
    """
    Point MLflow at MLFLOW_TRACKING_URI, or a local mlruns/ store when unset.

    Returns:
        str: The experiment name in use
    """
    tracking_uri = os.getenv("MLFLOW_TRACKING_URI")
    if not tracking_uri:
        mlruns_path = os.path.abspath(os.path.join(os.getcwd(), "mlruns"))
        tracking_uri = f"file://{mlruns_path}"
    mlflow.set_tracking_uri(tracking_uri)

    name = experiment_name or os.getenv("MLFLOW_EXPERIMENT_NAME", DEFAULT_EXPERIMENT)
    mlflow.set_experiment(name)
    logger.info(f"Tracking runs in experiment '{name}' at {tracking_uri}")
    return name


def _finite(metrics: Dict[str, float]) -> Dict[str, float]:
    clean = {}
    for key, value in metrics.items():
        try:
            number = float(value)
        except (TypeError, ValueError):
            continue
        if number == number and abs(number) != float("inf"):
            clean[key] = number
    return clean


def log_run(
    params: Dict[str, object],
    metrics: Dict[str, float],
    output_dir: Optional[str] = None,
    experiment_name: Optional[str] = None,
    run_name: Optional[str] = None,
) -> Optional[str]:
    """
    Record one solver run; failures are logged and swallowed.

    Returns:
        Optional[str]: MLflow run id, or None when tracking failed
    """
    try:
        configure_tracking(experiment_name)
        with mlflow.start_run(run_name=run_name) as run:
            mlflow.log_params({k: v for k, v in params.items() if v is not None})
            mlflow.log_metrics(_finite(metrics))
            if output_dir and os.path.isdir(output_dir):
                mlflow.log_artifacts(output_dir)
            logger.info(f"Run tracked with id {run.info.run_id}")
            return run.info.run_id
    except Exception as e:
        logger.warning(f"Run tracking failed: {str(e)}")
        return None
