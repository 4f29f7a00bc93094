"""Label-conditioned linear-Gaussian autoregressive dynamics.

Each label owns an order-``p`` model

    x_t = A_1 x_{t-1} + ... + A_p x_{t-p} + b + e_t,   e_t ~ N(0, diag(sigma2))

used for one-step likelihoods, closed-loop forecasting and generative
window classification.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

LOG_2PI = float(np.log(2.0 * np.pi))


class InsufficientDataError(ValueError):
    pass


@dataclass
class Trajectory:
    samples: np.ndarray
    dt: float = 0.01
    label: str | None = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[0] < 2:
            raise ValueError("trajectory needs a (T >= 2, d) sample matrix")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("trajectory contains non-finite samples")

    def __len__(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class ContextStream:
    """Per-step context records.  Carried through the API, never used."""

    records: tuple = ()

    def check(self, length: int) -> None:
        if len(self.records) not in (0, length):
            raise ValueError("context stream must be empty or match the trajectory length")


@dataclass(frozen=True)
class LabelDynamics:
    label: str
    coefs: np.ndarray    # (p, d, d); coefs[k] multiplies x_{t-k-1}
    offset: np.ndarray   # (d,)
    sigma2: np.ndarray   # (d,) diagonal noise variances
    meta: Mapping[str, str] = field(default_factory=dict)

    @property
    def order(self) -> int:
        return self.coefs.shape[0]

    @property
    def dim(self) -> int:
        return self.offset.shape[0]

    @property
    def covariance(self) -> np.ndarray:
        return np.diag(self.sigma2)

    def predict_mean(self, history) -> np.ndarray:
        """One-step mean given the last ``p`` samples (oldest first)."""
        h = np.asarray(history, dtype=float)
        p = self.order
        if h.shape[0] < p:
            raise ValueError(f"need {p} history rows, got {h.shape[0]}")
        mean = self.offset.copy()
        for k in range(p):
            mean += self.coefs[k] @ h[-1 - k]
        return mean

    def log_normalizer(self) -> float:
        return -0.5 * float(np.sum(LOG_2PI + np.log(self.sigma2)))


def _design(trajs: Sequence[np.ndarray], p: int) -> tuple[np.ndarray, np.ndarray]:
    rows, targets = [], []
    for x in trajs:
        T = x.shape[0]
        lagged = [x[p - k - 1:T - k - 1] for k in range(p)]
        rows.append(np.hstack(lagged + [np.ones((T - p, 1))]))
        targets.append(x[p:])
    return np.vstack(rows), np.vstack(targets)


def fit_dynamics(trajectories: Sequence[Trajectory | np.ndarray], order: int = 3,
                 ridge: float = 0.0, var_floor: float = 1e-12,
                 label: str | None = None, dataset: str = "") -> LabelDynamics:
    """Least-squares fit of one label's AR model.

    Minimises ``mean ||x_t - pred_t||^2 + ridge * ||A||_F^2`` over all
    trajectories.  The intercept is not penalised, and the penalty is per
    row so duplicating the data leaves the solution unchanged.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    arrays = [np.asarray(getattr(t, "samples", t), dtype=float) for t in trajectories]
    if not arrays:
        raise InsufficientDataError("no trajectories")
    if label is None:
        label = next((t.label for t in trajectories if getattr(t, "label", None)), "")
    d = arrays[0].shape[1]
    usable = [x for x in arrays if x.shape[0] > order]
    n_rows = sum(x.shape[0] - order for x in usable)
    if n_rows < order * d + d + 1:
        raise InsufficientDataError(
            f"{n_rows} usable rows for order {order}, need {order * d + d + 1}"
        )
    Z, Y = _design(usable, order)
    n_coef = order * d
    if ridge > 0:
        penalty = np.zeros((n_coef, Z.shape[1]))
        penalty[:, :n_coef] = np.sqrt(ridge * n_rows) * np.eye(n_coef)
        Z_aug = np.vstack([Z, penalty])
        Y_aug = np.vstack([Y, np.zeros((n_coef, d))])
    else:
        Z_aug, Y_aug = Z, Y
    W, *_ = np.linalg.lstsq(Z_aug, Y_aug, rcond=None)
    resid = Y - Z @ W
    sigma2 = np.maximum(np.mean(resid**2, axis=0), var_floor)
    coefs = np.stack([W[k * d:(k + 1) * d].T for k in range(order)])
    offset = W[n_coef].copy()
    meta = {"dataset": dataset, "n_rows": str(n_rows), "ridge": repr(ridge)}
    return LabelDynamics(label, coefs, offset, sigma2, meta)


def step_log_likelihood(model: LabelDynamics, history, x_t) -> float:
    """Gaussian log-density (nats) of ``x_t`` after ``history``."""
    r = np.asarray(x_t, dtype=float) - model.predict_mean(history)
    return model.log_normalizer() - 0.5 * float(np.sum(r * r / model.sigma2))


def sequence_log_likelihoods(model: LabelDynamics, samples) -> np.ndarray:
    """Per-step log-likelihoods of ``samples[p:]``, shape ``(T - p,)``."""
    x = np.asarray(samples, dtype=float)
    p = model.order
    T = x.shape[0]
    mean = np.broadcast_to(model.offset, (T - p, model.dim)).copy()
    for k in range(p):
        mean += x[p - k - 1:T - k - 1] @ model.coefs[k].T
    r = x[p:] - mean
    return model.log_normalizer() - 0.5 * np.sum(r * r / model.sigma2, axis=1)


def forecast_batch(model: LabelDynamics, histories, horizon: int) -> np.ndarray:
    """Closed-loop mean rollouts for a stack of histories.

    ``histories`` has shape ``(n, >=p, d)``; returns ``(n, horizon, d)``.
    """
    h = np.asarray(histories, dtype=float)
    p = model.order
    window = h[:, -p:, :].copy()
    out = np.empty((h.shape[0], horizon, h.shape[2]))
    At = [model.coefs[k].T for k in range(p)]
    for step in range(horizon):
        nxt = model.offset + window[:, -1, :] @ At[0]
        for k in range(1, p):
            nxt = nxt + window[:, -1 - k, :] @ At[k]
        out[:, step] = nxt
        window = np.concatenate([window[:, 1:], nxt[:, None, :]], axis=1)
    return out


def forecast(model: LabelDynamics, history, horizon: int) -> np.ndarray:
    """Mean rollout of ``horizon`` steps, each prediction fed back as input."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    h = np.asarray(history, dtype=float)
    if h.shape[0] < model.order:
        raise ValueError(f"need {model.order} history rows, got {h.shape[0]}")
    p = model.order
    buf = [row for row in h[-p:]]
    out = np.empty((horizon, model.dim))
    for step in range(horizon):
        nxt = model.offset.copy()
        for k in range(p):
            nxt += model.coefs[k] @ buf[-1 - k]
        out[step] = nxt
        buf.append(nxt)
    return out


def normalize_log(logw) -> np.ndarray:
    """Exponentiate and normalise log-weights after subtracting the max."""
    logw = np.asarray(logw, dtype=float)
    m = np.max(logw)
    if not np.isfinite(m):
        raise ValueError("all weights are zero")
    w = np.exp(logw - m)
    return w / w.sum()


def classify_window(models: Sequence[LabelDynamics], window, prior=None) -> np.ndarray:
    """Posterior over ``models`` for the samples in ``window``."""
    window = np.asarray(window, dtype=float)
    n = len(models)
    prior = np.full(n, 1.0 / n) if prior is None else np.asarray(prior, dtype=float)
    if np.any(prior < 0) or not np.any(prior > 0):
        raise ValueError("prior must be non-negative and not all zero")
    max_order = max(m.order for m in models)
    if window.shape[0] <= max_order:
        raise ValueError("window must be longer than the largest model order")
    with np.errstate(divide="ignore"):
        logw = np.log(prior)
    for i, m in enumerate(models):
        # every model scores the same steps so posteriors stay comparable
        logw[i] += sequence_log_likelihoods(m, window[max_order - m.order:]).sum()
    return normalize_log(logw)


class GenerativeClassifier:
    """Maps classes to dynamics models and classifies windows by likelihood."""

    def __init__(self, models: Mapping[str, LabelDynamics], prior=None, name: str = ""):
        self.classes = tuple(models)
        self.models = tuple(models[c] for c in self.classes)
        self.prior = prior
        self.name = name

    def predict_proba(self, window) -> np.ndarray:
        return classify_window(self.models, window, self.prior)

    def predict(self, window) -> str:
        return self.classes[int(np.argmax(self.predict_proba(window)))]


# -- model files ---------------------------------------------------------

def _fmt(values) -> str:
    return " ".join(format(float(v), ".17g") for v in np.ravel(values))


def format_model(model: LabelDynamics) -> str:
    p, d = model.order, model.dim
    lines = [f"label={model.label} order={p} d={d}"]
    for key in sorted(model.meta):
        lines.append(f"meta {key}={model.meta[key]}")
    for k in range(p):
        lines.append(f"A{k + 1}: {_fmt(model.coefs[k])}")
    lines.append(f"b: {_fmt(model.offset)}")
    lines.append(f"Sigma: {_fmt(model.covariance)}")
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> LabelDynamics:
    header, *body = [ln for ln in text.splitlines() if ln.strip()]
    fields = dict(tok.split("=", 1) for tok in header.split())
    p, d = int(fields["order"]), int(fields["d"])
    meta, mats = {}, {}
    for ln in body:
        if ln.startswith("meta "):
            k, _, v = ln[5:].partition("=")
            meta[k] = v
            continue
        key, _, vals = ln.partition(":")
        mats[key.strip()] = np.array([float(v) for v in vals.split()])
    coefs = np.stack([mats[f"A{k + 1}"].reshape(d, d) for k in range(p)])
    sigma = mats["Sigma"].reshape(d, d)
    if np.any(sigma - np.diag(np.diag(sigma))):
        raise ValueError("only diagonal covariances are supported")
    return LabelDynamics(fields["label"], coefs, mats["b"], np.diag(sigma).copy(), meta)


def save_model(model: LabelDynamics, path) -> None:
    Path(path).write_text(format_model(model), encoding="utf-8")


def load_model(path) -> LabelDynamics:
    return parse_model(Path(path).read_text(encoding="utf-8"))
