"""On-line semi-Markov filter over (label, elapsed duration).

One step runs prediction through hazards and transitions, scores the new
observation under every label's dynamics, multiplies by constraint gates,
renormalises, and then updates boundary bookkeeping and the forecast.
All beliefs are kept as log-probabilities.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from movact.allen import ActionInterval, CompositionTable, relation_from_bounds
from movact.dynamics import LabelDynamics, Trajectory, forecast, step_log_likelihood
from movact.segmenter.model import SegmentModel

log = logging.getLogger(__name__)

OPENED = "SEGMENT_OPENED"
CLOSED = "SEGMENT_CLOSED"


class DegenerateBeliefError(RuntimeError):
    """Every hypothesis was annihilated by the gate."""


@dataclass(frozen=True)
class Event:
    kind: str
    label: str
    start: int
    end: int | None
    t: int


@dataclass(frozen=True)
class FilterState:
    """Carried belief and bookkeeping after ``t`` observations."""

    t: int = 0
    log_alpha: np.ndarray | None = None       # (L, d_max)
    log_prior: np.ndarray | None = None       # (L, d_max), last predictive prior
    loglik: np.ndarray | None = None          # (L,), last likelihood vector
    history: np.ndarray | None = None         # last observations, oldest first
    lstar: int | None = None
    open_label: int | None = None
    open_start: int | None = None
    closed: tuple[ActionInterval, ...] = ()

    @property
    def alpha(self) -> np.ndarray:
        return np.exp(self.log_alpha)

    @property
    def marginal(self) -> np.ndarray:
        return np.exp(logsumexp(self.log_alpha, axis=1))

    @property
    def prior_marginal(self) -> np.ndarray:
        return np.exp(logsumexp(self.log_prior, axis=1))

    def expected_starts(self) -> np.ndarray:
        """Posterior mean start time of the running segment, per label."""
        tau = np.arange(1, self.log_alpha.shape[1] + 1)
        a = self.alpha
        mass = a.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(mass > 0, (a * (self.t - tau + 1)).sum(axis=1) / mass, np.nan)


Gate = Callable[[FilterState, int], np.ndarray]


@dataclass
class FilterConfig:
    seg: SegmentModel
    models: Sequence[LabelDynamics]
    table: CompositionTable | None = None
    gate: Gate | None = None
    horizon: int = 50
    switch_threshold: float = 0.5
    fallback: bool = True

    def __post_init__(self):
        self.models = tuple(self.models)
        if len(self.models) != self.seg.n_labels:
            raise ValueError("one dynamics model per label is required")
        labels = tuple(m.label for m in self.models)
        if labels != self.seg.labels:
            raise ValueError(f"model labels {labels} do not match segment labels {self.seg.labels}")
        self.warmup = max(m.order for m in self.models)
        # a new segment cannot start within half the shortest admissible duration
        d_min = np.argmax(self.seg.durations > 0, axis=1) + 1
        self.start_guard = int(d_min.min()) // 2
        with np.errstate(divide="ignore"):
            self.log_stay = np.log1p(-self.seg.hazards)
            self.log_end = np.log(self.seg.hazards)
            trans = self.seg.transition * consecutive_weights(self.seg.labels, self.table)
            self.log_trans = np.log(trans)
            self.log_initial = np.log(self.seg.initial)


def consecutive_weights(labels: Sequence[str], table: CompositionTable | None) -> np.ndarray:
    """Plausibility of each ordered label pair as adjacent segments.

    Adjacent segments tile the time axis, so the earlier one always ends
    strictly before the later one starts.
    """
    L = len(labels)
    if table is None:
        return np.ones((L, L))
    rel = relation_from_bounds(1, 2, 3, 4)
    return np.array([[table.weight(a, b, rel) for b in labels] for a in labels])


def predict_prior(state: FilterState, config: FilterConfig) -> np.ndarray:
    """Predictive log-prior over (label, elapsed duration) for the next step."""
    L, D = config.seg.n_labels, config.seg.d_max
    out = np.full((L, D), -np.inf)
    if state.log_alpha is None:
        out[:, 0] = config.log_initial
    else:
        la = state.log_alpha
        out[:, 1:] = la[:, :-1] + config.log_stay[:, :-1]
        ended = logsumexp(la + config.log_end, axis=1)
        out[:, 0] = logsumexp(ended[:, None] + config.log_trans, axis=0)
    z = logsumexp(out)
    if not np.isfinite(z):
        raise DegenerateBeliefError("predictive prior has no mass")
    return out - z


def update_belief(log_prior: np.ndarray, loglik, gate=None) -> np.ndarray:
    """Posterior log-belief ``prior * likelihood * gate``, normalised.

    ``gate`` may be per label ``(L,)`` or per cell ``(L, d_max)``.
    """
    post = log_prior + np.asarray(loglik, dtype=float)[:, None]
    if gate is not None:
        g = np.asarray(gate, dtype=float)
        if np.any(g < 0) or np.any(g > 1):
            raise ValueError("gate factors must lie in [0, 1]")
        if g.ndim == 1:
            g = g[:, None]
        with np.errstate(divide="ignore"):
            post = post + np.log(g)
    z = logsumexp(post)
    if not np.isfinite(z):
        raise DegenerateBeliefError("all gated mass is zero")
    return post - z


def label_loglik(config: FilterConfig, history: np.ndarray | None, x) -> np.ndarray:
    n = 0 if history is None else history.shape[0]
    if n < config.warmup:
        return np.zeros(config.seg.n_labels)
    return np.array([step_log_likelihood(m, history[-m.order:], x) for m in config.models])


@dataclass
class StepResult:
    state: FilterState
    marginal: np.ndarray
    lstar: int
    forecast: np.ndarray | None
    events: list[Event] = field(default_factory=list)


def _boundary_update(state: FilterState, log_alpha: np.ndarray, t: int, lstar: int,
                     labels: Sequence[str], threshold: float, guard: int = 0):
    """Open/close recognised segments from the duration posterior.

    A boundary is declared once the mass of hypotheses whose running segment
    started more than ``guard`` steps after the recorded open start, and
    whose label differs from the open label, exceeds ``threshold``.
    """
    events = []
    if state.open_start is None:
        events.append(Event(OPENED, labels[lstar], t, None, t))
        return lstar, t, state.closed, events
    alpha = np.exp(log_alpha)
    D = alpha.shape[1]
    k = max(min(t - state.open_start - guard, D), 0)  # cells tau <= k started after open_start + guard
    newer = alpha[:, :k].sum(axis=1)
    older = alpha[:, k:].sum(axis=1)
    open_label = int(np.argmax(older)) if older.sum() > 0 else state.open_label
    newer[open_label] = 0.0
    closed = state.closed
    open_start = state.open_start
    if k > 0 and newer.sum() > threshold:
        new_label = int(np.argmax(newer))
        tau_hat = int(np.argmax(alpha[new_label, :k])) + 1
        s_hat = max(t - tau_hat + 1, open_start + 2)
        if s_hat <= t:
            iv = ActionInterval(labels[open_label], open_start, s_hat - 1)
            closed = closed + (iv,)
            events.append(Event(CLOSED, iv.label, iv.start, iv.end, t))
            events.append(Event(OPENED, labels[new_label], s_hat, None, t))
            open_label, open_start = new_label, s_hat
    return open_label, open_start, closed, events


def filter_step(state: FilterState, config: FilterConfig, x_t, context=None,
                loglik=None) -> StepResult:
    """Advance the filter by one observation.

    ``context`` is accepted and ignored.  ``loglik`` overrides the per-label
    log-likelihoods computed from the dynamics models.
    """
    x_t = np.asarray(x_t, dtype=float)
    t = state.t + 1
    log_prior = predict_prior(state, config)
    if loglik is None:
        loglik = label_loglik(config, state.history, x_t)
    else:
        loglik = np.asarray(loglik, dtype=float)
    gate = config.gate(state, t) if config.gate is not None else None
    try:
        log_alpha = update_belief(log_prior, loglik, gate)
    except DegenerateBeliefError:
        if gate is None or not config.fallback:
            raise
        log.warning("step %d: gate annihilated every hypothesis, using ungated update", t)
        log_alpha = update_belief(log_prior, loglik, None)
    marginal = np.exp(logsumexp(log_alpha, axis=1))
    lstar = int(np.argmax(marginal))

    open_label, open_start, closed, events = _boundary_update(
        state, log_alpha, t, lstar, config.seg.labels, config.switch_threshold, config.start_guard)

    keep = max(config.warmup, 1)
    hist = x_t[None, :] if state.history is None else np.vstack([state.history, x_t])[-keep:]

    fc = None
    model = config.models[lstar]
    if config.horizon > 0 and hist.shape[0] >= model.order:
        fc = forecast(model, hist, config.horizon)

    new_state = FilterState(t, log_alpha, log_prior, loglik, hist, lstar, open_label, open_start, closed)
    return StepResult(new_state, marginal, lstar, fc, events)


@dataclass
class Timeline:
    labels: tuple[str, ...]
    marginals: np.ndarray            # (T, L)
    lstar: np.ndarray                # (T,)
    events: list[Event]
    forecasts: dict[int, np.ndarray]
    final: FilterState

    @property
    def intervals(self) -> tuple[ActionInterval, ...]:
        """Closed segments plus the still-open one, truncated at the last step."""
        st = self.final
        out = st.closed
        if st.open_start is not None and st.t > st.open_start:
            out = out + (ActionInterval(self.labels[st.open_label], st.open_start, st.t),)
        return out

    def to_csv(self, path, truth: np.ndarray | None = None) -> None:
        by_t: dict[int, list[str]] = {}
        for ev in self.events:
            by_t.setdefault(ev.t, []).append(f"{ev.kind}:{ev.label}:{ev.start}:{'' if ev.end is None else ev.end}")
        T = self.lstar.shape[0]
        horizon = max((f.shape[0] for f in self.forecasts.values()), default=0)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "lstar", *[f"alpha_{lab}" for lab in self.labels], "event", "forecast_rmse_available"])
            for i in range(T):
                t = i + 1
                avail = int(t in self.forecasts and t + horizon <= T)
                w.writerow([t, self.labels[self.lstar[i]], *(f"{v:.10g}" for v in self.marginals[i]),
                            ";".join(by_t.get(t, [])), avail])

    def forecasts_to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "k", "q1_hat", "q2_hat", "q3_hat"])
            for t in sorted(self.forecasts):
                for k, row in enumerate(self.forecasts[t], start=1):
                    w.writerow([t, k, *(f"{v:.7f}" for v in row)])


def run_online(stream: Trajectory | np.ndarray, config: FilterConfig, keep_forecasts: bool = True,
               loglik=None) -> Timeline:
    """Fold :func:`filter_step` over every sample of ``stream``.

    ``loglik`` is an optional ``(T, L)`` table replacing model likelihoods.
    """
    x = np.asarray(getattr(stream, "samples", stream), dtype=float)
    ll = None if loglik is None else np.asarray(loglik, dtype=float)
    state = FilterState()
    L = config.seg.n_labels
    marginals = np.empty((x.shape[0], L))
    lstar = np.empty(x.shape[0], dtype=int)
    events: list[Event] = []
    forecasts: dict[int, np.ndarray] = {}
    for i, row in enumerate(x):
        res = filter_step(state, config, row, loglik=None if ll is None else ll[i])
        state = res.state
        marginals[i] = res.marginal
        lstar[i] = res.lstar
        events.extend(res.events)
        if keep_forecasts and res.forecast is not None:
            forecasts[state.t] = res.forecast
    return Timeline(config.seg.labels, marginals, lstar, events, forecasts, state)


# -- gates ---------------------------------------------------------------

class FixedGate:
    """Precomputed per-step, per-label factors (row ``t - 1`` used at step ``t``)."""

    def __init__(self, factors):
        self.factors = np.asarray(factors, dtype=float)

    def __call__(self, state: FilterState, t: int) -> np.ndarray:
        return self.factors[t - 1]


class AllenGate:
    """Admissibility of each hypothesis against the recognised segments.

    Hypotheses belonging to the open segment are scored against the last
    closed interval; hypotheses that started more than ``guard`` steps after
    the open segment's start are scored against the open segment, treated as
    closed just before them.  ``guard`` should match the filter's
    ``start_guard``.
    """

    def __init__(self, labels: Sequence[str], table: CompositionTable, d_max: int, guard: int = 0):
        self.labels = tuple(labels)
        self.table = table
        self.d_max = d_max
        self.guard = guard

    def __call__(self, state: FilterState, t: int) -> np.ndarray:
        L = len(self.labels)
        out = np.ones((L, self.d_max))
        if state.open_start is None:
            return out
        s_open = state.open_start
        k = max(min(t - s_open - self.guard, self.d_max), 0)
        if state.closed:
            prev = state.closed[-1]
            rel = relation_from_bounds(prev.start, prev.end, s_open, t)
            out[:, k:] = np.array([self.table.weight(prev.label, lab, rel) for lab in self.labels])[:, None]
        if k > 0:
            rel = relation_from_bounds(s_open, t - 1, t, t)
            cur = self.labels[state.open_label]
            out[:, :k] = np.array([self.table.weight(cur, lab, rel) for lab in self.labels])[:, None]
        return out


class ProductGate:
    def __init__(self, *gates: Gate):
        self.gates = gates

    def __call__(self, state: FilterState, t: int) -> np.ndarray:
        out = np.asarray(1.0)
        for g in self.gates:
            f = np.asarray(g(state, t), dtype=float)
            out = out * (f[:, None] if f.ndim == 1 else f)
        return out


def unconstrained(state: FilterState, t: int) -> np.ndarray:
    return np.asarray(1.0)

