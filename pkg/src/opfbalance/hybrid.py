"""Undersample-then-oversample pipelines.

Score-based pruning (us1/us2/us3) runs first; the class gap is then
recomputed on the pruned set and closed with standard cluster-based
oversampling.  A gap of zero skips the oversampling stage entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dataset import Dataset
from .distance import DistanceFn, as_distance
from .oversampling import OverPolicy, oversample
from .rng import Rng
from .undersampling import undersample


@dataclass(frozen=True)
class HybridPolicy:
    """Pruning stage tag plus the oversampling stage policy."""

    under: str = "us1"
    over: OverPolicy = field(default_factory=OverPolicy)

    def __post_init__(self):
        if self.under not in ("us1", "us2", "us3"):
            raise ValueError(
                "hybrid pipelines take under in {'us1', 'us2', 'us3'}; "
                "plain 'us' already balances, composing it is a no-op"
            )


def hybrid_resample(train: Dataset, val: Dataset, policy: HybridPolicy, rng: Rng,
                    d: DistanceFn = None) -> Dataset:
    """Prune, recompute the class gap, then synthesize up to balance."""
    d = as_distance(d)
    pruned = undersample(train, val, policy.under, d)
    c0, c1 = pruned.class_counts()
    n_s = abs(c0 - c1)
    if n_s == 0:
        return pruned
    return oversample(pruned, n_s, policy.over, rng, d)
