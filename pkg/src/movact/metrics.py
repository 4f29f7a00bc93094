"""Forecast and classification metrics, evaluation protocols and timing."""
from __future__ import annotations

import csv
import statistics
import time
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from movact.dynamics import GenerativeClassifier, LabelDynamics, forecast_batch, sequence_log_likelihoods


class UndefinedCorrelationError(ValueError):
    """Correlation with a constant series."""


def pcc(pred, truth) -> float:
    """Sample Pearson correlation."""
    a = np.asarray(pred, dtype=float).ravel()
    b = np.asarray(truth, dtype=float).ravel()
    if a.shape != b.shape or a.size < 2:
        raise ValueError("pcc needs two series of equal length >= 2")
    da, db = a - a.mean(), b - b.mean()
    na, nb = np.sqrt(da @ da), np.sqrt(db @ db)
    if nb == 0.0 or na == 0.0:
        raise UndefinedCorrelationError("correlation with a constant series is undefined")
    return float(np.clip((da @ db) / (na * nb), -1.0, 1.0))


def rmse(pred, truth) -> float:
    a = np.asarray(pred, dtype=float)
    b = np.asarray(truth, dtype=float)
    if a.shape != b.shape or a.size < 1:
        raise ValueError("rmse needs two series of equal shape")
    return float(np.sqrt(np.mean((a - b) ** 2)))


# -- motion forecasting --------------------------------------------------

@dataclass(frozen=True)
class MotionEvalResult:
    pcc_mean: np.ndarray     # (d,)
    pcc_std: np.ndarray
    rmse_mean: np.ndarray
    rmse_std: np.ndarray
    n_trajectories: int
    pcc_excluded: np.ndarray  # (d,) trajectories with constant truth per joint


def window_forecasts(model: LabelDynamics, samples, window: int = 100, horizon: int = 50,
                     stride: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Forecasts and ground truth for every window position, both ``(n, horizon, d)``.

    A window ending at sample ``t`` (1-based) forecasts ``t+1 .. t+horizon``.
    """
    x = np.asarray(getattr(samples, "samples", samples), dtype=float)
    T = x.shape[0]
    if T < window + horizon:
        raise ValueError(f"trajectory of {T} samples is shorter than window + horizon")
    ends = np.arange(window, T - horizon + 1, stride)
    p = model.order
    hist = np.stack([x[e - p:e] for e in ends])
    truth = np.stack([x[e:e + horizon] for e in ends])
    return forecast_batch(model, hist, horizon), truth


def evaluate_label_motion(model: LabelDynamics, trajectories: Sequence, window: int = 100,
                          horizon: int = 50, stride: int = 1) -> MotionEvalResult:
    """Per-joint PCC and RMSE, pooled over windows within each trajectory."""
    pccs, rmses = [], []
    for tr in trajectories:
        pred, truth = window_forecasts(model, tr, window, horizon, stride)
        d = pred.shape[-1]
        p_flat, t_flat = pred.reshape(-1, d), truth.reshape(-1, d)
        row = np.full(d, np.nan)
        for j in range(d):
            try:
                row[j] = pcc(p_flat[:, j], t_flat[:, j])
            except UndefinedCorrelationError:
                pass
        pccs.append(row)
        rmses.append(np.sqrt(np.mean((p_flat - t_flat) ** 2, axis=0)))
    if not pccs:
        raise ValueError("no trajectories to evaluate")
    P, R = np.vstack(pccs), np.vstack(rmses)
    excluded = np.isnan(P).sum(axis=0)
    with warnings.catch_warnings():
        # all-NaN joints (constant truth everywhere) stay NaN
        warnings.simplefilter("ignore", RuntimeWarning)
        pm, ps = np.nanmean(P, axis=0), np.nanstd(P, axis=0)
    return MotionEvalResult(pm, ps, R.mean(axis=0), R.std(axis=0), len(pccs), excluded)


def evaluate_motion(models: Mapping[str, LabelDynamics], test: Mapping[str, Sequence],
                    window: int = 100, horizon: int = 50, stride: int = 1) -> dict[str, MotionEvalResult]:
    """Evaluate each label's model on that label's test trajectories."""
    return {lab: evaluate_label_motion(models[lab], test[lab], window, horizon, stride) for lab in test}


# -- action classification -----------------------------------------------

@dataclass(frozen=True)
class IncrementalPrefix:
    step: int = 10
    max_length: int | None = None


@dataclass(frozen=True)
class SlidingWindow:
    size: int = 10
    stride: int = 1


@dataclass
class ClassEvalResult:
    classes: tuple[str, ...]
    confusion: np.ndarray                 # rows = truth, cols = prediction
    prefix_lengths: np.ndarray | None = None
    prefix_accuracy: np.ndarray | None = None
    meta: dict[str, str] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.confusion) / self.confusion.sum())

    @property
    def precision(self) -> np.ndarray:
        col = self.confusion.sum(axis=0)
        return np.divide(np.diag(self.confusion), col, out=np.zeros(len(self.classes)), where=col > 0)

    @property
    def recall(self) -> np.ndarray:
        row = self.confusion.sum(axis=1)
        return np.divide(np.diag(self.confusion), row, out=np.zeros(len(self.classes)), where=row > 0)

    @property
    def f1(self) -> np.ndarray:
        p, r = self.precision, self.recall
        return np.divide(2 * p * r, p + r, out=np.zeros(len(self.classes)), where=(p + r) > 0)

    @property
    def macro_f1(self) -> float:
        return float(self.f1.mean())

    @property
    def plateau_onset(self) -> int | None:
        """First prefix length from which accuracy stays at its final value or above."""
        if self.prefix_accuracy is None or self.prefix_accuracy.size == 0:
            return None
        final = self.prefix_accuracy[-1]
        below = np.nonzero(self.prefix_accuracy < final)[0]
        i = 0 if below.size == 0 else below[-1] + 1
        return int(self.prefix_lengths[i])


def majority_vote(predictions: Sequence[str], order: Sequence[str]) -> str:
    """Modal prediction; ties go to the label listed first in ``order``."""
    counts = Counter(predictions)
    if not counts:
        raise ValueError("no predictions to vote on")
    best = max(counts.values())
    for lab in order:
        if counts.get(lab, 0) == best:
            return lab
    raise ValueError("winning prediction is not in the label order")


def _step_scores(classifier: GenerativeClassifier, x: np.ndarray) -> tuple[np.ndarray, int]:
    """Per-step log-likelihoods ``(T - pmax, K)`` with every model scoring the same steps."""
    pmax = max(m.order for m in classifier.models)
    cols = [sequence_log_likelihoods(m, x[pmax - m.order:]) for m in classifier.models]
    return np.column_stack(cols), pmax


def _log_prior(classifier: GenerativeClassifier) -> np.ndarray:
    K = len(classifier.classes)
    prior = np.full(K, 1.0 / K) if classifier.prior is None else np.asarray(classifier.prior, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(prior)


def window_predictions(classifier: GenerativeClassifier, samples, size: int = 10, stride: int = 1) -> list[str]:
    """Class predicted for each ``size``-sample window.

    Equivalent to calling ``classifier.predict`` on every window, computed
    from one pass of per-step likelihoods.
    """
    x = np.asarray(getattr(samples, "samples", samples), dtype=float)
    ll, pmax = _step_scores(classifier, x)
    if size <= pmax:
        raise ValueError("window must be longer than the largest model order")
    cum = np.vstack([np.zeros((1, ll.shape[1])), np.cumsum(ll, axis=0)])
    starts = np.arange(0, x.shape[0] - size + 1, stride)
    # window [s, s+size) scores steps s+pmax .. s+size-1, rows s .. s+size-pmax-1 of ll
    scores = cum[starts + size - pmax] - cum[starts] + _log_prior(classifier)
    return [classifier.classes[i] for i in np.argmax(scores, axis=1)]


def prefix_predictions(classifier: GenerativeClassifier, samples, lengths: Sequence[int]) -> list[str]:
    """Class predicted from each prefix ``samples[:n]``."""
    x = np.asarray(getattr(samples, "samples", samples), dtype=float)
    ll, pmax = _step_scores(classifier, x)
    cum = np.vstack([np.zeros((1, ll.shape[1])), np.cumsum(ll, axis=0)])
    out = []
    for n in lengths:
        if n <= pmax:
            raise ValueError("prefix must be longer than the largest model order")
        out.append(classifier.classes[int(np.argmax(cum[n - pmax] + _log_prior(classifier)))])
    return out


def evaluate_actions(classifier: GenerativeClassifier, test: Mapping[str, Sequence],
                     protocol: IncrementalPrefix | SlidingWindow = SlidingWindow()) -> ClassEvalResult:
    """Confusion matrix of ``classifier`` on ``test`` (true class -> trajectories)."""
    classes = classifier.classes
    K = len(classes)
    conf = np.zeros((K, K), dtype=int)
    if isinstance(protocol, SlidingWindow):
        for true, trajs in test.items():
            i = classes.index(true)
            for tr in trajs:
                votes = window_predictions(classifier, tr, protocol.size, protocol.stride)
                conf[i, classes.index(majority_vote(votes, classes))] += 1
        return ClassEvalResult(classes, conf, meta={"protocol": "sliding_window",
                                                    "size": str(protocol.size), "stride": str(protocol.stride)})
    if not isinstance(protocol, IncrementalPrefix):
        raise TypeError(f"unknown protocol {protocol!r}")
    T = min(len(getattr(tr, "samples", tr)) for trajs in test.values() for tr in trajs)
    top = T - 1 if protocol.max_length is None else protocol.max_length
    lengths = np.arange(protocol.step, top + 1, protocol.step)
    correct = np.zeros(lengths.size)
    for true, trajs in test.items():
        i = classes.index(true)
        for tr in trajs:
            preds = prefix_predictions(classifier, tr, lengths)
            correct += np.array([p == true for p in preds])
            conf[i, classes.index(preds[-1])] += 1
    acc = correct / conf.sum()
    return ClassEvalResult(classes, conf, lengths, acc,
                           meta={"protocol": "incremental_prefix", "step": str(protocol.step)})


# -- timing --------------------------------------------------------------

@dataclass(frozen=True)
class TimingResult:
    mean: float
    std: float
    reps: int


def benchmark(fn: Callable[[], object], reps: int = 100, warmup: int = 3) -> TimingResult:
    """Wall-clock time of ``fn`` on a monotonic clock, first ``warmup`` runs discarded."""
    if reps < 10:
        raise ValueError("benchmark needs at least 10 repetitions")
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    kept = times[warmup:]
    return TimingResult(statistics.fmean(kept), statistics.pstdev(kept), len(kept))


# -- reports -------------------------------------------------------------

def write_motion_table(path, results: Mapping[str, MotionEvalResult], joints=("q1", "q2", "q3")) -> None:
    head = ["label"]
    for j in joints:
        head += [f"pcc_{j}_avg", f"pcc_{j}_std"]
    for j in joints:
        head += [f"rmse_{j}_avg", f"rmse_{j}_std"]
    head += ["n_trajectories", "pcc_excluded"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(head)
        for lab, r in results.items():
            row = [lab]
            for j in range(len(joints)):
                row += [f"{r.pcc_mean[j]:.6f}", f"{r.pcc_std[j]:.6f}"]
            for j in range(len(joints)):
                row += [f"{r.rmse_mean[j]:.6f}", f"{r.rmse_std[j]:.6f}"]
            row += [r.n_trajectories, " ".join(str(int(v)) for v in r.pcc_excluded)]
            w.writerow(row)


def write_accuracy_table(path, results: Mapping[str, ClassEvalResult]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "accuracy", "macro_f1", "n"])
        for name, r in results.items():
            w.writerow([name, f"{r.accuracy:.6f}", f"{r.macro_f1:.6f}", r.total])


def write_confusion(path, result: ClassEvalResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["truth", *result.classes, "precision", "recall"])
        for i, lab in enumerate(result.classes):
            w.writerow([lab, *result.confusion[i], f"{result.precision[i]:.6f}", f"{result.recall[i]:.6f}"])


def write_prefix_curve(path, result: ClassEvalResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["prefix_len", "accuracy"])
        for n, a in zip(result.prefix_lengths, result.prefix_accuracy):
            w.writerow([int(n), f"{a:.6f}"])
