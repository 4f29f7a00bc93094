"""Semi-Markov label model: transitions, duration distributions, hazards."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np


def geometric_pmf(rho: float, d_max: int, d_min: int = 1) -> np.ndarray:
    """Geometric durations on ``d_min..d_max`` with the tail lumped at ``d_max``.

    The hazard is exactly ``rho`` inside the support and 1 at ``d_max``.
    """
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must lie in (0, 1]")
    if not 1 <= d_min <= d_max:
        raise ValueError("need 1 <= d_min <= d_max")
    pmf = np.zeros(d_max)
    k = np.arange(d_max - d_min)
    pmf[d_min - 1:d_max - 1] = rho * (1.0 - rho) ** k
    pmf[d_max - 1] = (1.0 - rho) ** (d_max - d_min)
    return pmf


def gaussian_pmf(mu: float, sigma: float, d_min: int, d_max: int) -> np.ndarray:
    """Discretised Gaussian renormalised on ``d_min..d_max``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if not 1 <= d_min <= d_max:
        raise ValueError("need 1 <= d_min <= d_max")
    d = np.arange(d_min, d_max + 1)
    w = np.exp(-0.5 * ((d - mu) / sigma) ** 2)
    pmf = np.zeros(d_max)
    pmf[d_min - 1:] = w / w.sum()
    return pmf


def hazards_from_pmf(pmf) -> np.ndarray:
    """``h(tau) = p(tau) / P(d >= tau)``, set to 1 once the tail is exhausted."""
    pmf = np.asarray(pmf, dtype=float)
    tail = np.cumsum(pmf[..., ::-1], axis=-1)[..., ::-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(tail > 0, pmf / np.where(tail > 0, tail, 1.0), 1.0)
    h = np.clip(h, 0.0, 1.0)
    h[..., -1] = 1.0
    return h


@dataclass(frozen=True)
class SegmentModel:
    labels: tuple[str, ...]
    transition: np.ndarray   # (L, L), row = previous label
    durations: np.ndarray    # (L, d_max), column k is duration k + 1
    initial: np.ndarray      # (L,)
    families: tuple[str, ...] = field(default=())

    def __post_init__(self):
        L = len(self.labels)
        tr = np.asarray(self.transition, dtype=float)
        du = np.atleast_2d(np.asarray(self.durations, dtype=float))
        ini = np.asarray(self.initial, dtype=float)
        if tr.shape != (L, L) or du.shape[0] != L or ini.shape != (L,):
            raise ValueError("shape mismatch between labels, transition, durations, initial")
        for name, arr in (("transition", tr), ("durations", du), ("initial", ini)):
            if np.any(arr < 0):
                raise ValueError(f"{name} has negative entries")
        if np.any(np.abs(tr.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("transition rows must sum to 1")
        if np.any(np.abs(du.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("duration distributions must sum to 1")
        if abs(ini.sum() - 1.0) > 1e-12:
            raise ValueError("initial distribution must sum to 1")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "transition", tr)
        object.__setattr__(self, "durations", du)
        object.__setattr__(self, "initial", ini)
        object.__setattr__(self, "families", tuple(self.families))
        object.__setattr__(self, "_hazards", hazards_from_pmf(du))

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    @property
    def d_max(self) -> int:
        return self.durations.shape[1]

    @property
    def hazards(self) -> np.ndarray:
        return self._hazards

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def survival(self) -> np.ndarray:
        """``P(d >= tau)`` for tau = 1..d_max, shape ``(L, d_max)``."""
        return np.cumsum(self.durations[:, ::-1], axis=1)[:, ::-1]


def hazard(seg: SegmentModel, label: str | int, tau: int) -> float:
    if tau < 1:
        raise ValueError("tau must be >= 1")
    i = label if isinstance(label, (int, np.integer)) else seg.index(label)
    if tau > seg.d_max:
        return 1.0
    return float(seg.hazards[i, tau - 1])


def build_segment_model(labels: Sequence[str], durations: Mapping[str, tuple],
                        transition=None, initial=None) -> SegmentModel:
    """Assemble a model from duration family specs.

    ``durations[label]`` is ``("geometric", rho, d_min, d_max)`` or
    ``("gaussian", mu, sigma, d_min, d_max)``.  Missing transition/initial
    default to uniform.
    """
    labels = tuple(labels)
    L = len(labels)
    specs = [tuple(durations[lab]) for lab in labels]
    d_max = max(int(s[-1]) for s in specs)
    rows, fams = [], []
    for s in specs:
        kind = s[0]
        if kind == "geometric":
            _, rho, lo, hi = s
            pmf = geometric_pmf(float(rho), int(hi), int(lo))
        elif kind == "gaussian":
            _, mu, sigma, lo, hi = s
            pmf = gaussian_pmf(float(mu), float(sigma), int(lo), int(hi))
        else:
            raise ValueError(f"unknown duration family {kind!r}")
        rows.append(np.pad(pmf, (0, d_max - pmf.size)))
        fams.append(" ".join(str(v) for v in s))
    tr = np.full((L, L), 1.0 / L) if transition is None else np.asarray(transition, dtype=float)
    ini = np.full(L, 1.0 / L) if initial is None else np.asarray(initial, dtype=float)
    return SegmentModel(labels, tr, np.vstack(rows), ini, tuple(fams))


# -- files ---------------------------------------------------------------

def format_segment_model(seg: SegmentModel) -> str:
    if len(seg.families) != seg.n_labels:
        raise ValueError("only family-built segment models can be written")
    fmt = lambda arr: " ".join(format(float(v), ".17g") for v in arr)  # noqa: E731
    lines = ["labels=" + ",".join(seg.labels), "initial: " + fmt(seg.initial)]
    for lab, row in zip(seg.labels, seg.transition):
        lines.append(f"transition {lab}: {fmt(row)}")
    for lab, fam in zip(seg.labels, seg.families):
        lines.append(f"duration {lab}: {fam}")
    return "\n".join(lines) + "\n"


def parse_segment_model(text: str) -> SegmentModel:
    labels, initial, rows, fams = None, None, {}, {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("labels="):
            labels = tuple(line[len("labels="):].split(","))
        elif line.startswith("initial:"):
            initial = [float(v) for v in line.split(":", 1)[1].split()]
        else:
            key, _, vals = line.partition(":")
            kind, lab = key.split(None, 1)
            if kind == "transition":
                rows[lab] = [float(v) for v in vals.split()]
            elif kind == "duration":
                parts = vals.split()
                fams[lab] = (parts[0], *parts[1:])
            else:
                raise ValueError(f"unexpected line {raw!r}")
    if labels is None:
        raise ValueError("missing labels= line")
    return build_segment_model(labels, fams, [rows[lab] for lab in labels], initial)


def save_segment_model(seg: SegmentModel, path) -> None:
    Path(path).write_text(format_segment_model(seg), encoding="utf-8")


def load_segment_model(path) -> SegmentModel:
    return parse_segment_model(Path(path).read_text(encoding="utf-8"))
