"""Exact MAP segmentation of a single chain by semi-Markov dynamic programming."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from movact.allen import ActionInterval, CompositionTable
from movact.dynamics import LabelDynamics, sequence_log_likelihoods
from movact.segmenter.filter import consecutive_weights
from movact.segmenter.model import SegmentModel


class InfeasibleError(RuntimeError):
    """No complete segmentation has positive score."""


def stream_log_likelihoods(models: Sequence[LabelDynamics], samples) -> np.ndarray:
    """Per-step, per-label log-likelihoods, shape ``(T, L)``.

    The first ``max order`` rows are zero (uniform likelihood during warm-up),
    matching what the on-line filter uses.
    """
    x = np.asarray(getattr(samples, "samples", samples), dtype=float)
    T = x.shape[0]
    warm = max(m.order for m in models)
    out = np.zeros((T, len(models)))
    if T > warm:
        for j, m in enumerate(models):
            out[warm:, j] = sequence_log_likelihoods(m, x[warm - m.order:])
    return out


@dataclass(frozen=True)
class MapResult:
    intervals: tuple[ActionInterval, ...]
    log_score: float


def map_segmentation_from_loglik(loglik, seg: SegmentModel,
                                 table: CompositionTable | None = None) -> MapResult:
    """Best complete tiling of ``1..T`` given a ``(T, L)`` log-likelihood table.

    The score is initial label x per-segment duration probability x
    transitions x adjacent-pair plausibility x observation likelihoods.
    """
    ll = np.asarray(loglik, dtype=float)
    T, L = ll.shape
    D = seg.d_max
    if np.any(seg.durations[:, 0] > 0):
        raise ValueError("segments of duration 1 cannot be represented as intervals")
    with np.errstate(divide="ignore"):
        log_dur = np.log(seg.durations)              # (L, D)
        log_link = np.log(seg.transition * consecutive_weights(seg.labels, None if table is None else table))
        log_init = np.log(seg.initial)
    cum = np.vstack([np.zeros((1, L)), np.cumsum(ll, axis=0)])  # cum[e] = sum of rows < e

    # best[e, l]: best score of a tiling of 1..e whose last segment has label l
    best = np.full((T + 1, L), -np.inf)
    back_d = np.zeros((T + 1, L), dtype=int)
    back_prev = np.full((T + 1, L), -1, dtype=int)
    # entry[s, l]: best score for a segment of label l starting at s + 1
    entry = np.full((T + 1, L), -np.inf)
    entry_prev = np.full((T + 1, L), -1, dtype=int)
    entry[0] = log_init
    for e in range(1, T + 1):
        d = np.arange(1, min(D, e) + 1)
        s = e - d
        cand = entry[s] + (cum[e] - cum[s]) + log_dur[:, d - 1].T   # (len(d), L)
        k = np.argmax(cand, axis=0)
        best[e] = cand[k, np.arange(L)]
        back_d[e] = d[k]
        back_prev[e] = entry_prev[s[k], np.arange(L)]
        if e < T:
            link = best[e][:, None] + log_link                 # (prev, next)
            entry_prev[e] = np.argmax(link, axis=0)
            entry[e] = link[entry_prev[e], np.arange(L)]
    last = int(np.argmax(best[T]))
    score = float(best[T, last])
    if not np.isfinite(score):
        raise InfeasibleError("every complete segmentation has zero score")
    out = []
    e, lab = T, last
    while e > 0:
        d = int(back_d[e, lab])
        prev = int(back_prev[e, lab])
        out.append(ActionInterval(seg.labels[lab], e - d + 1, e))
        e, lab = e - d, prev
    return MapResult(tuple(reversed(out)), score)


def map_segmentation(stream, seg: SegmentModel, models: Sequence[LabelDynamics],
                     table: CompositionTable | None = None) -> MapResult:
    return map_segmentation_from_loglik(stream_log_likelihoods(models, stream), seg, table)
