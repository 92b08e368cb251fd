# SPDX-License-Identifier: Apache-2.0
"""Python access to the csiauth feature, calibration and metric code."""

from ._csiauth import (
    CsiauthError,
    __version__,
    auc,
    calibrate,
    default_config,
    eer,
    extract_features,
    feature_names,
    gini,
    run_cv,
    synth_dataset,
)

__all__ = [
    "CsiauthError",
    "__version__",
    "auc",
    "calibrate",
    "default_config",
    "eer",
    "extract_features",
    "feature_names",
    "gini",
    "run_cv",
    "synth_dataset",
]
