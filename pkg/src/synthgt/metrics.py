"""Localization metrics scoring attributions against ground-truth masks.

Every metric flattens each sample over ``(channels, timesteps)`` into a score
vector ``s`` and a binary label vector ``m``, scores the sample, and averages
over samples. Samples on which a metric is undefined (e.g. an all-zero mask)
are excluded from the mean and counted in ``MetricResult.n_excluded``.

By default ranking-style metrics score ``|attribution|``; the error metrics
(MAE, MSE) always use raw values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Union

import numpy as np

from .core import Dataset, MetricResult, SynthError, validate_shapes

NAC_STD_FLOOR = 1e-12


class MetricError(SynthError):
    pass


class AllSamplesDegenerate(MetricError, ValueError):
    pass


class DegenerateSample(MetricError, ValueError):
    """Raised for a degenerate sample when ``exclude_degenerate`` is off."""


class UnknownMetric(MetricError, KeyError):
    def __str__(self):
        return self.args[0]


@dataclass(frozen=True)
class EvalOptions:
    """Shared preprocessing switches.

    Attributes:
        use_abs: Score ``|attribution|`` for the ranking/mass metrics.
        normalize: Rescale AUC-ROC and AUC-PR so chance is 0 and perfect is 1.
        exclude_degenerate: Skip samples where a metric is undefined; if False,
            such a sample raises :class:`DegenerateSample`.
        pointing_any_hit: Pointing game counts a hit if *any* position attaining
            the maximum lies in the mask, instead of only the lowest index.
    """

    use_abs: bool = True
    normalize: bool = False
    exclude_degenerate: bool = True
    pointing_any_hit: bool = False


# ---------------------------------------------------------------------------
# per-sample scores; each returns None when the sample is degenerate


def _midranks(s: np.ndarray) -> np.ndarray:
    _, inverse, counts = np.unique(s, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    return (ends - (counts - 1) / 2.0)[inverse]


def roc_auc(s: np.ndarray, m: np.ndarray) -> Optional[float]:
    """Probability a positive outranks a negative, ties counting one half."""
    n_pos = int(m.sum())
    n_neg = m.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    rank_sum = _midranks(s)[m].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def average_precision(s: np.ndarray, m: np.ndarray) -> Optional[float]:
    """Step-wise AP with tied scores grouped into one threshold."""
    n_pos = int(m.sum())
    if n_pos == 0:
        return None
    order = np.argsort(-s, kind="stable")
    s_sorted, m_sorted = s[order], m[order]
    ends = np.append(np.flatnonzero(np.diff(s_sorted)), s.size - 1)
    tp = np.cumsum(m_sorted)[ends]
    precision = tp / (ends + 1.0)
    recall = tp / float(n_pos)
    delta = np.diff(recall, prepend=0.0)
    return float(np.sum(delta * precision))


def _auc_roc(s, m, opts):
    auc = roc_auc(s, m)
    if auc is None or not opts.normalize:
        return auc
    return (auc - 0.5) / 0.5


def _auc_pr(s, m, opts):
    ap = average_precision(s, m)
    if ap is None or not opts.normalize:
        return ap
    p = m.mean()
    if p >= 1.0:
        return None
    return float((ap - p) / (1.0 - p))


def _relevance_mass(s, m, opts):
    total = s.sum()
    if not m.any() or total == 0:
        return None
    return float(s[m].sum() / total)


def _relevance_rank(s, m, opts):
    k = int(m.sum())
    if k == 0:
        return None
    top = np.argsort(-s, kind="stable")[:k]
    return float(m[top].sum() / k)


def _pointing_game(s, m, opts):
    if not m.any():
        return None
    if opts.pointing_any_hit:
        return float(m[s == s.max()].any())
    return float(m[int(np.argmax(s))])


def _nac(s, m, opts):
    if not m.any():
        return None
    std = s.std()
    if std < NAC_STD_FLOOR:
        return 0.0
    z = (s - s.mean()) / std
    return float(z[m].mean())


def _mae(s, m, opts):
    return float(np.mean(np.abs(s - m)))


def _mse(s, m, opts):
    return float(np.mean((s - m) ** 2))


@dataclass(frozen=True)
class _Metric:
    name: str
    fn: Callable
    uses_abs: bool
    normalizable: bool = False
    degenerate_rule: str = ""


CATALOG: dict[str, _Metric] = {
    m.name: m for m in (
        _Metric("auc_roc", _auc_roc, True, True, "mask all-0 or all-1"),
        _Metric("auc_pr", _auc_pr, True, True, "mask all-0 (or all-1 when normalized)"),
        _Metric("relevance_mass", _relevance_mass, True, False, "mask all-0 or zero attribution mass"),
        _Metric("relevance_rank", _relevance_rank, True, False, "mask all-0"),
        _Metric("pointing_game", _pointing_game, True, False, "mask all-0"),
        _Metric("nac", _nac, True, False, "mask all-0"),
        _Metric("mae", _mae, False),
        _Metric("mse", _mse, False),
    )
}

ALIASES = {
    "auc_roc_score": "auc_roc",
    "auc_pr_score": "auc_pr",
    "relevance_mass_accuracy": "relevance_mass",
    "relevance_rank_accuracy": "relevance_rank",
    "nac_score": "nac",
    "mean_absolute_error": "mae",
    "mean_squared_error": "mse",
}

METRIC_NAMES = tuple(CATALOG)


def canonical_name(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in CATALOG:
        raise UnknownMetric(f"unknown metric {name!r}; expected one of {list(METRIC_NAMES)}")
    return name


# ---------------------------------------------------------------------------
# dataset-level evaluation

MaskSource = Union[Dataset, np.ndarray]


def _flatten(attributions, target: MaskSource) -> tuple[np.ndarray, np.ndarray]:
    mask = target.mask if isinstance(target, Dataset) else np.asarray(target)
    attr = np.asarray(attributions, dtype=np.float64)
    validate_shapes(attr, mask, "attributions and mask")
    if not np.all(np.isfinite(attr)):
        raise ValueError("attributions contain non-finite values")
    n = attr.shape[0]
    return attr.reshape(n, -1), mask.reshape(n, -1).astype(bool)


def _score(metric: _Metric, raw: np.ndarray, absolute: np.ndarray, labels: np.ndarray,
           opts: EvalOptions) -> MetricResult:
    scores = absolute if (metric.uses_abs and opts.use_abs) else raw
    per_sample, indices = [], []
    for i in range(scores.shape[0]):
        value = metric.fn(scores[i], labels[i], opts)
        if value is None:
            if not opts.exclude_degenerate:
                raise DegenerateSample(f"{metric.name}: sample {i} is degenerate ({metric.degenerate_rule})")
            continue
        per_sample.append(value)
        indices.append(i)
    n_excluded = scores.shape[0] - len(per_sample)
    if not per_sample:
        raise AllSamplesDegenerate(
            f"{metric.name}: all {scores.shape[0]} samples are degenerate ({metric.degenerate_rule})")
    warning = None
    if n_excluded:
        warning = (f"{metric.name}: excluded {n_excluded} of {scores.shape[0]} samples as degenerate "
                   f"({metric.degenerate_rule})")
    return MetricResult(
        metric_name=metric.name,
        per_sample=per_sample,
        indices=indices,
        n_excluded=n_excluded,
        normalized=bool(metric.normalizable and opts.normalize),
        warning=warning,
    )


def evaluate_all(attributions, dataset: MaskSource, opts: Optional[EvalOptions] = None,
                 metric_names: Optional[Iterable[str]] = None) -> dict[str, MetricResult]:
    """Run several metrics over one shared preprocessing pass.

    ``metric_names`` defaults to the full catalog; aliases such as
    ``"auc_pr_score"`` are accepted. Results keep the requested order.
    """
    opts = opts or EvalOptions()
    names = [canonical_name(n) for n in (METRIC_NAMES if metric_names is None else metric_names)]
    raw, labels = _flatten(attributions, dataset)
    absolute = np.abs(raw)
    return {name: _score(CATALOG[name], raw, absolute, labels, opts) for name in dict.fromkeys(names)}


def _single(name: str, attributions, dataset, opts: Optional[EvalOptions], overrides: dict) -> MetricResult:
    opts = replace(opts or EvalOptions(), **{k: v for k, v in overrides.items() if v is not None})
    return evaluate_all(attributions, dataset, opts, [name])[name]


def auc_roc_score(attributions, dataset: MaskSource, opts: Optional[EvalOptions] = None, *,
                  normalize: Optional[bool] = None, use_abs: Optional[bool] = None) -> MetricResult:
    """Per-sample ROC AUC (midrank ties); ``normalize`` maps chance 0.5 to 0."""
    return _single("auc_roc", attributions, dataset, opts, {"normalize": normalize, "use_abs": use_abs})


def auc_pr_score(attributions, dataset: MaskSource, opts: Optional[EvalOptions] = None, *,
                 normalize: Optional[bool] = None, use_abs: Optional[bool] = None) -> MetricResult:
    """Per-sample average precision; ``normalize`` gives ``(AP - p) / (1 - p)`` with prevalence ``p``."""
    return _single("auc_pr", attributions, dataset, opts, {"normalize": normalize, "use_abs": use_abs})


def relevance_mass_accuracy(attributions, dataset: MaskSource, opts: Optional[EvalOptions] = None, *,
                            use_abs: Optional[bool] = None) -> MetricResult:
    """Share of attribution mass inside the mask.

    With ``use_abs=False`` signed mass is used and the score can leave [0, 1].
    """
    return _single("relevance_mass", attributions, dataset, opts, {"use_abs": use_abs})


def relevance_rank_accuracy(attributions, dataset: MaskSource, opts: Optional[EvalOptions] = None, *,
                            use_abs: Optional[bool] = None) -> MetricResult:
    """Fraction of the top-K positions (K = mask size) inside the mask; ties go to the lower index."""
    return _single("relevance_rank", attributions, dataset, opts, {"use_abs": use_abs})


def pointing_game(attributions, dataset: MaskSource, opts: Optional[EvalOptions] = None, *,
                  use_abs: Optional[bool] = None, any_hit: Optional[bool] = None) -> MetricResult:
    return _single("pointing_game", attributions, dataset, opts, {"use_abs": use_abs, "pointing_any_hit": any_hit})


def nac_score(attributions, dataset: MaskSource, opts: Optional[EvalOptions] = None, *,
              use_abs: Optional[bool] = None) -> MetricResult:
    """Mean z-scored attribution over mask positions; constant attributions score 0."""
    return _single("nac", attributions, dataset, opts, {"use_abs": use_abs})


def mean_absolute_error(attributions, dataset: MaskSource) -> MetricResult:
    return _single("mae", attributions, dataset, None, {})


def mean_squared_error(attributions, dataset: MaskSource) -> MetricResult:
    return _single("mse", attributions, dataset, None, {})
