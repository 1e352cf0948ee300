"""Optimum-path forest classification, clustering and imbalance resampling.

The estimator classes in :mod:`opfbalance.estimators` are the array-in /
array-out public API; the functional layer underneath
(:mod:`opfbalance.dataset`, :mod:`opfbalance.supervised`,
:mod:`opfbalance.clustering`, :mod:`opfbalance.undersampling`,
:mod:`opfbalance.oversampling`, :mod:`opfbalance.hybrid`,
:mod:`opfbalance.evaluation`) operates on :class:`opfbalance.Dataset`.
"""

from .dataset import (
    Dataset,
    SplitSpec,
    impute_mean,
    load_csv,
    split,
    split_validation,
    standard_scale,
    write_csv,
)
from .distance import CallableDistance, DistanceFn, EuclideanDistance, as_distance
from .estimators import (
    O2pfOversampler,
    OpfClassifier,
    OpfClustering,
    OpfHybridResampler,
    OpfUndersampler,
    SmoteOversampler,
)
from .evaluation import (
    DEFAULT_KMAX_GRID,
    METHOD_NAMES,
    ExperimentReport,
    RunResult,
    f1_score,
    run_experiment,
    smote_baseline,
    tune_kmax,
    wilcoxon_signed_rank,
)
from .hybrid import HybridPolicy, hybrid_resample
from .oversampling import OverPolicy, allocate, geometric_median, oversample
from .rng import Rng
from .undersampling import ClassPreservationWarning, score_training, undersample

__version__ = "0.1.0"

__all__ = [
    "Dataset", "SplitSpec", "Rng",
    "load_csv", "write_csv", "impute_mean", "standard_scale", "split", "split_validation",
    "DistanceFn", "EuclideanDistance", "CallableDistance", "as_distance",
    "OpfClassifier", "OpfClustering",
    "OpfUndersampler", "O2pfOversampler", "OpfHybridResampler", "SmoteOversampler",
    "OverPolicy", "HybridPolicy", "allocate", "oversample", "geometric_median",
    "score_training", "undersample", "ClassPreservationWarning", "hybrid_resample",
    "f1_score", "wilcoxon_signed_rank", "smote_baseline", "tune_kmax", "run_experiment",
    "RunResult", "ExperimentReport", "METHOD_NAMES", "DEFAULT_KMAX_GRID",
]
