"""Python bindings for the gazelab gaze estimation toolkit."""

import json

from ._gazelab import (
    GazelabError,
    compose,
    compute_hog,
    correction_from,
    grid_targets,
    head_from_euler,
    read_trials,
    run_cli,
    synthesize,
    train_model,
    visual_angle_between,
)
from ._gazelab import evaluate as _evaluate


def evaluate(model_path, manifest, condition="visible"):
    """Evaluate a saved model; returns the report as a dict."""
    return json.loads(_evaluate(str(model_path), str(manifest), condition))


__all__ = [
    "GazelabError",
    "compose",
    "compute_hog",
    "correction_from",
    "evaluate",
    "grid_targets",
    "head_from_euler",
    "read_trials",
    "run_cli",
    "synthesize",
    "train_model",
    "visual_angle_between",
]
