"""Brute-force enumeration of segmentations, used as a test oracle.

Every tiling of the time axis into labelled segments is scored directly
from the duration pmf, transitions, pairwise plausibility and per-step
likelihoods, with no recursion shared with the filter.
"""
from __future__ import annotations

import math

import numpy as np

from movact.allen import CompositionTable, relation_from_bounds
from movact.segmenter.model import SegmentModel

MAX_T = 12
MAX_LABELS = 3


class InstanceTooLargeError(ValueError):
    pass


def _guard(T: int, L: int) -> None:
    if T > MAX_T or L > MAX_LABELS:
        raise InstanceTooLargeError(f"brute force limited to T <= {MAX_T}, labels <= {MAX_LABELS}")


def tilings(T: int, n_labels: int, d_max: int):
    """All labelled tilings of ``1..T`` as lists of ``(label, start, end)``."""
    if T == 0:
        yield []
        return
    for d in range(1, min(d_max, T) + 1):
        for rest in tilings(T - d, n_labels, d_max):
            s = (rest[-1][2] + 1) if rest else 1
            for lab in range(n_labels):
                yield rest + [(lab, s, s + d - 1)]


def _score(segs, seg: SegmentModel, loglik, table, gate, censored: bool) -> float:
    """Probability weight of one tiling (not normalised)."""
    w = seg.initial[segs[0][0]]
    for k, (lab, s, e) in enumerate(segs):
        d = e - s + 1
        if censored and k == len(segs) - 1:
            w *= seg.durations[lab, d - 1:].sum() if d <= seg.d_max else 0.0
        else:
            w *= seg.durations[lab, d - 1] if d <= seg.d_max else 0.0
        if k > 0:
            plab, ps, pe = segs[k - 1]
            w *= seg.transition[plab, lab]
            if table is not None:
                w *= table.weight(seg.labels[plab], seg.labels[lab], relation_from_bounds(ps, pe, s, e))
        if w == 0.0:
            return 0.0
        for t in range(s, e + 1):
            w *= math.exp(loglik[t - 1, lab])
            if gate is not None:
                w *= gate[t - 1, lab]
    return w


def _loglik(stream, models):
    if models is None:
        return np.asarray(stream, dtype=float)
    from movact.segmenter.recognize import stream_log_likelihoods
    return stream_log_likelihoods(models, stream)


def brute_force_posterior(stream, seg: SegmentModel, table: CompositionTable | None = None,
                          gate=None, models=None) -> np.ndarray:
    """Exact filtering marginals ``p(label_t | X_1..t)``, shape ``(T, L)``.

    ``stream`` is a ``(T, L)`` log-likelihood table, or raw samples when
    ``models`` is given.  ``gate`` holds fixed ``(T, L)`` factors.
    """
    ll = _loglik(stream, models)
    T, L = ll.shape
    _guard(T, L)
    g = None if gate is None else np.asarray(gate, dtype=float)
    out = np.zeros((T, L))
    for t in range(1, T + 1):
        for segs in tilings(t, L, seg.d_max):
            w = _score(segs, seg, ll, table, g, censored=True)
            out[t - 1, segs[-1][0]] += w
        total = out[t - 1].sum()
        if total <= 0:
            raise ValueError(f"no segmentation of 1..{t} has positive weight")
        out[t - 1] /= total
    return out


def brute_force_map(stream, seg: SegmentModel, table: CompositionTable | None = None, models=None):
    """Best complete tiling and its log score, or ``(None, -inf)`` if all score 0."""
    ll = _loglik(stream, models)
    T, L = ll.shape
    _guard(T, L)
    best, best_w = None, 0.0
    for segs in tilings(T, L, seg.d_max):
        w = _score(segs, seg, ll, table, None, censored=False)
        if w > best_w:
            best, best_w = segs, w
    if best is None:
        return None, -math.inf
    return [(seg.labels[lab], s, e) for lab, s, e in best], math.log(best_w)
