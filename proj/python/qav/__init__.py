"""Quality-aware comparison scores for magnitude-aware face embeddings."""

from ._qav import (
    CalibConfig,
    CalibrationPoint,
    CalibrationResult,
    ComparisonSet,
    Embedding,
    QavError,
    SynthConfig,
    WeightParams,
    aggregate,
    all_pairs,
    build_comparison_set,
    calibrate,
    cosine,
    decompose,
    eer,
    fit_linear,
    fmr_at,
    fnmr_at,
    generate,
    load_calibration,
    load_embeddings,
    load_protocol,
    qa_score,
    qa_scores,
    roc_auc,
    save_calibration,
    save_embeddings,
    scaled_score,
    threshold_at_fmr,
    weight,
    REFERENCE_PARAMS_100,
    __version__,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
