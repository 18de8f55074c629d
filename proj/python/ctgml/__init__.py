"""Cardiotocography classification toolkit."""

from ._ctgml import (
    ToolkitError,
    accuracy,
    confusion_matrix,
    correlation,
    feature_names,
    forest_fit_predict,
    lda,
    load_csv,
    pca,
    run_experiment_grid,
    sparsemax,
    standardize,
    stratified_split,
    svm_fit_predict,
    synthesize,
    tabnet_fit_predict,
)

__all__ = [
    "ToolkitError",
    "accuracy",
    "confusion_matrix",
    "correlation",
    "feature_names",
    "forest_fit_predict",
    "lda",
    "load_csv",
    "pca",
    "run_experiment_grid",
    "sparsemax",
    "standardize",
    "stratified_split",
    "svm_fit_predict",
    "synthesize",
    "tabnet_fit_predict",
]
