"""Experiment harness: metrics, significance testing, tuning and repeated runs.

Protocol per run: derive a seed, split 70/15/15 stratified, resample the
training partition per method (tuning k_max on the validation split where
the method has a grid), fit the supervised forest on the result, score F1 on
the untouched test partition.  All methods inside one run share the same
split so the Wilcoxon comparison is properly paired.

Report files:

* structured text - ``run method=<m> run=<r> seed=<s> f1=<v> kmax=<k>``
  records, one per (method, run), then ``summary method=...`` lines and
  pairwise ``wilcoxon a=... b=...`` lines;
* flat CSV - header ``method,run,seed,f1,elapsed``.

Timing values vary between invocations, so serializers only include them on
request; the default output is byte-reproducible from (input, flags).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, SplitSpec, impute_mean, split, standard_scale
from .distance import DistanceFn, as_distance
from .hybrid import HybridPolicy, hybrid_resample
from .oversampling import OverPolicy, oversample
from .rng import Rng
from .undersampling import undersample
from . import supervised

DEFAULT_KMAX_GRID = (5, 10, 20, 30, 40, 50)
SMOTE_K_GRID = (5, 6, 7, 8, 9, 10)

METHOD_NAMES = (
    "original",
    "o2pf", "o2pf-ri", "o2pf-mi", "o2pf-p", "o2pf-wi",
    "opf-us", "opf-us1", "opf-us2", "opf-us3",
    "us1-o2pf", "us2-o2pf", "us3-o2pf",
    "smote",
)


def f1_score(true_labels, predicted, positive: int) -> float:
    """F1 on the positive class; 0.0 when precision + recall is 0."""
    t = np.asarray(true_labels)
    p = np.asarray(predicted)
    if t.shape != p.shape or t.size < 1:
        raise ValueError("label vectors must be non-empty and equal length")
    tp = int(((t == positive) & (p == positive)).sum())
    fp = int(((t != positive) & (p == positive)).sum())
    fn = int(((t == positive) & (p != positive)).sum())
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def wilcoxon_signed_rank(a, b, alpha: float = 0.05):
    """Two-sided paired signed-rank test; returns (p, significant).

    Zero differences are dropped; ties get average ranks.  With fewer than
    10 non-zero pairs the p-value enumerates all 2^n sign assignments as
    P(|T+ - S/2| >= |t+ - S/2|); otherwise a normal approximation with tie
    and continuity corrections is used.  All-zero differences give p = 1.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("paired samples must have equal length")
    diff = a - b
    diff = diff[diff != 0.0]
    n = diff.size
    if n == 0:
        return 1.0, False
    if n < 5:
        raise ValueError(f"need at least 5 non-zero differences, got {n}")

    ranks = _average_ranks(np.abs(diff))
    t_plus = float(ranks[diff > 0].sum())
    s = n * (n + 1) / 2.0
    center = s / 2.0

    if n < 10:
        observed = abs(t_plus - center)
        hits = 0
        for mask in range(1 << n):
            t = 0.0
            for i in range(n):
                if mask >> i & 1:
                    t += ranks[i]
            if abs(t - center) >= observed:
                hits += 1
        p = hits / float(1 << n)
    else:
        _, tie_counts = np.unique(ranks, return_counts=True)
        tie_term = float((tie_counts**3 - tie_counts).sum())
        var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0
        if var <= 0:
            return 1.0, False
        dev = t_plus - center
        dev -= 0.5 * math.copysign(1.0, dev) if dev != 0 else 0.0
        z = dev / math.sqrt(var)
        p = min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))
    return p, p < alpha


def smote_baseline(train: Dataset, n_s: int, k: int, rng: Rng, d: DistanceFn = None) -> Dataset:
    """Segment-interpolation oversampling between minority nearest neighbors.

    Each synthetic picks a random minority sample x, one of its k minority
    nearest neighbors x_hat (k clamped to minority size - 1), and emits
    ``x + u (x_hat - x)`` with u ~ U(0, 1).
    """
    d = as_distance(d)
    if n_s < 1:
        raise ValueError("n_s must be >= 1")
    ds = train.sorted_by_id()
    minority = ds.minority_label()
    pos = np.flatnonzero(ds.labels == minority)
    if pos.size < 2:
        raise ValueError("smote requires at least 2 minority samples")
    members = ds.features[pos]
    k_eff = min(int(k), pos.size - 1)
    if k_eff < 1:
        raise ValueError("k must be >= 1")

    dists = d.rows(members, members)
    np.fill_diagonal(dists, np.inf)
    neighbors = np.argsort(dists, axis=1, kind="stable")[:, :k_eff]

    synth = np.empty((n_s, ds.dim))
    for i in range(n_s):
        x_i = rng.randint(0, pos.size)
        nn_i = neighbors[x_i][rng.randint(0, k_eff)]
        u = rng.uniform()
        synth[i] = members[x_i] + u * (members[nn_i] - members[x_i])

    first_id = int(ds.ids.max()) + 1
    return Dataset(
        np.vstack([ds.features, synth]),
        np.concatenate([ds.labels, np.full(n_s, minority, dtype=np.int64)]),
        np.concatenate([ds.ids, np.arange(first_id, first_id + n_s, dtype=np.int64)]),
        feature_names=ds.feature_names,
        label_name=ds.label_name,
        label_values=ds.label_values,
    )


@dataclass(frozen=True)
class Method:
    """A named resampler: ``resample(train, val, k, rng, d) -> Dataset``.

    ``tune_grid`` is None for methods without a hyperparameter.
    """

    name: str
    tune_grid: tuple
    resample: object


def _class_gap(ds: Dataset) -> int:
    c0, c1 = ds.class_counts()
    return abs(c0 - c1)


def resolve_method(name: str, kmax_grid=DEFAULT_KMAX_GRID) -> Method:
    name = str(name).lower()
    kmax_grid = tuple(int(k) for k in kmax_grid)

    if name == "original":
        return Method(name, None, lambda train, val, k, rng, d: train)

    if name in ("o2pf", "o2pf-ri", "o2pf-mi", "o2pf-p", "o2pf-wi"):
        variant = "standard" if name == "o2pf" else name.split("-", 1)[1]

        def over(train, val, k, rng, d, _variant=variant):
            n_s = _class_gap(train)
            if n_s == 0:
                return train
            return oversample(train, n_s, OverPolicy(_variant, k_max=int(k)), rng, d)

        return Method(name, kmax_grid, over)

    if name in ("opf-us", "opf-us1", "opf-us2", "opf-us3"):
        policy = name.replace("opf-", "")
        return Method(name, None, lambda train, val, k, rng, d, _p=policy: undersample(train, val, _p, d))

    if name in ("us1-o2pf", "us2-o2pf", "us3-o2pf"):
        under = name.split("-", 1)[0]

        def hyb(train, val, k, rng, d, _under=under):
            return hybrid_resample(train, val, HybridPolicy(_under, OverPolicy("standard", int(k))), rng, d)

        return Method(name, kmax_grid, hyb)

    if name == "smote":

        def sm(train, val, k, rng, d):
            n_s = _class_gap(train)
            if n_s == 0:
                return train
            return smote_baseline(train, n_s, int(k), rng, d)

        return Method(name, SMOTE_K_GRID, sm)

    raise ValueError(f"unknown method {name!r}; expected one of {METHOD_NAMES}")


def tune_kmax(train: Dataset, val: Dataset, method: Method, grid, rng: Rng,
              d: DistanceFn = None, positive: int = None) -> int:
    """Grid value with the best validation F1 (ties -> smaller value).

    Values larger than the data supports are clamped inside the resampler
    but reported as given.
    """
    d = as_distance(d)
    grid = [int(g) for g in grid]
    if not grid:
        raise ValueError("tuning grid must be non-empty")
    if positive is None:
        positive = train.minority_label()

    best_f1, best_k = -1.0, None
    for i, g in enumerate(sorted(grid)):
        resampled = method.resample(train, val, g, rng.child(i + 1), d)
        model = supervised.fit(resampled, d)
        preds, _ = supervised.predict(model, val.features, d)
        f1 = f1_score(val.labels, preds, positive)
        if f1 > best_f1:
            best_f1, best_k = f1, g
    return best_k


@dataclass(frozen=True)
class RunResult:
    method: str
    run: int
    seed: int
    f1: float
    elapsed: float
    k_max: int = None


@dataclass
class ExperimentReport:
    dataset: str
    base_seed: int
    runs: int
    methods: tuple
    positive_label: int
    results: list
    wilcoxon: dict
    flags: str = ""
    split_ids: list = field(default_factory=list, repr=False)

    def method_f1(self, name: str) -> np.ndarray:
        return np.array([r.f1 for r in self.results if r.method == name])

    def mean(self, name: str) -> float:
        return float(self.method_f1(name).mean())

    def std(self, name: str) -> float:
        values = self.method_f1(name)
        return float(values.std(ddof=1)) if values.size > 1 else 0.0


def run_experiment(ds: Dataset, methods, runs: int, base_seed: int, *,
                   kmax_grid=DEFAULT_KMAX_GRID, val_fraction: float = 0.15,
                   test_fraction: float = 0.15, fit_scaler_on_train: bool = False,
                   dataset_name: str = "dataset", d: DistanceFn = None,
                   flags: str = "") -> ExperimentReport:
    """Repeated-holdout evaluation of resampling methods.

    ``methods`` is a list of names or :class:`Method` objects; the
    no-resampling baseline ``original`` is always included (prepended when
    absent).  Run r derives its stream from ``Rng(base_seed).child(r + 1)``;
    identical inputs therefore reproduce the report exactly.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    resolved = [m if isinstance(m, Method) else resolve_method(m, kmax_grid) for m in methods]
    if all(m.name != "original" for m in resolved):
        resolved.insert(0, resolve_method("original", kmax_grid))

    d = as_distance(d)
    positive = ds.minority_label()
    prepared = impute_mean(ds)
    if not fit_scaler_on_train:
        prepared = standard_scale(prepared, prepared)

    train_fraction = 1.0 - val_fraction - test_fraction
    root = Rng(base_seed)
    results = []
    split_ids = []
    for r in range(runs):
        run_rng = root.child(r + 1)
        spec = SplitSpec(train_fraction, val_fraction, test_fraction, seed=run_rng.seed)
        train_ds, val_ds, test_ds = split(prepared, spec, run_rng.child(1))
        if fit_scaler_on_train:
            scaler_ref = train_ds
            train_ds = standard_scale(scaler_ref, train_ds)
            val_ds = standard_scale(scaler_ref, val_ds)
            test_ds = standard_scale(scaler_ref, test_ds)
        split_ids.append((set(train_ds.ids.tolist()), set(val_ds.ids.tolist()), set(test_ds.ids.tolist())))

        for m_idx, method in enumerate(resolved):
            method_rng = run_rng.child(100 + m_idx)
            started = time.perf_counter()
            try:
                chosen = None
                if method.tune_grid:
                    chosen = tune_kmax(train_ds, val_ds, method, method.tune_grid,
                                       method_rng.child(1), d, positive)
                resampled = method.resample(train_ds, val_ds, chosen, method_rng.child(2), d)
                model = supervised.fit(resampled, d)
                preds, _ = supervised.predict(model, test_ds.features, d)
                f1 = f1_score(test_ds.labels, preds, positive)
            except Exception as exc:
                raise RuntimeError(
                    f"run {r} failed for method {method.name!r} on {dataset_name!r}: {exc}"
                ) from exc
            results.append(RunResult(
                method=method.name,
                run=r,
                seed=run_rng.seed,
                f1=f1,
                elapsed=time.perf_counter() - started,
                k_max=chosen,
            ))

    names = tuple(m.name for m in resolved)
    pairwise = {}
    for i, a in enumerate(names):
        fa = [res.f1 for res in results if res.method == a]
        for b in names[i + 1:]:
            fb = [res.f1 for res in results if res.method == b]
            try:
                p, sig = wilcoxon_signed_rank(fa, fb)
            except ValueError:
                p, sig = float("nan"), False  # too few non-tied pairs to test
            pairwise[(a, b)] = (p, sig)

    return ExperimentReport(
        dataset=dataset_name,
        base_seed=base_seed,
        runs=runs,
        methods=names,
        positive_label=positive,
        results=results,
        wilcoxon=pairwise,
        flags=flags,
        split_ids=split_ids,
    )


def significance_vs_best(report: ExperimentReport) -> dict:
    """Per-method flag: statistically similar to the best-mean method.

    The best method is always similar to itself; an untestable pair (too few
    non-tied runs) counts as similar.
    """
    best = max(report.methods, key=report.mean)
    marks = {}
    for name in report.methods:
        if name == best:
            marks[name] = True
            continue
        key = (best, name) if (best, name) in report.wilcoxon else (name, best)
        p, sig = report.wilcoxon[key]
        marks[name] = (not sig) or math.isnan(p)
    return marks


def report_text(report: ExperimentReport, include_timings: bool = False) -> str:
    lines = [
        "# opfbalance evaluation report v1",
        f"dataset: {report.dataset}",
        f"base-seed: {report.base_seed}",
        f"runs: {report.runs}",
        f"methods: {','.join(report.methods)}",
        f"positive-label: {report.positive_label}",
        f"flags: {report.flags}",
        "",
    ]
    for res in report.results:
        k = res.k_max if res.k_max is not None else "-"
        line = f"run method={res.method} run={res.run} seed={res.seed} f1={res.f1!r} kmax={k}"
        if include_timings:
            line += f" elapsed={res.elapsed:.6f}"
        lines.append(line)
    lines.append("")
    for name in report.methods:
        lines.append(
            f"summary method={name} mean={report.mean(name)!r} std={report.std(name)!r} n={report.runs}"
        )
    lines.append("")
    for (a, b), (p, sig) in sorted(report.wilcoxon.items()):
        verdict = "yes" if sig else ("n/a" if math.isnan(p) else "no")
        lines.append(f"wilcoxon a={a} b={b} p={p!r} significant={verdict}")
    return "\n".join(lines) + "\n"


def report_csv(report: ExperimentReport, include_timings: bool = False) -> str:
    lines = ["method,run,seed,f1,elapsed"]
    for res in report.results:
        elapsed = f"{res.elapsed:.6f}" if include_timings else "-"
        lines.append(f"{res.method},{res.run},{res.seed},{res.f1!r},{elapsed}")
    return "\n".join(lines) + "\n"
