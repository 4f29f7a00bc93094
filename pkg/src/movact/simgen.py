"""Synthetic reaching datasets from a kinematic 3-DOF arm.

Joint convention: ``q1`` shoulder azimuth about +z, ``q2`` shoulder
elevation, ``q3`` elbow flexion.  The zero pose is a straight arm along +x.
Trajectories are minimum-jerk interpolations in joint space between inverse
kinematics solutions for grid points inside three target cubes.
"""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from movact.dynamics import Trajectory

VOLUMES = ("A", "B", "C")
INITIAL = "I"

# Nine movement labels in the order l1..l9.
MOVEMENTS: tuple[tuple[str, str], ...] = (
    ("I", "A"), ("I", "B"), ("I", "C"),
    ("A", "B"), ("A", "C"),
    ("B", "A"), ("B", "C"),
    ("C", "A"), ("C", "B"),
)
LABELS: tuple[str, ...] = tuple(f"{a}->{b}" for a, b in MOVEMENTS)

# Action classifiers group the movements that share a start volume.
CLASSIFIER_GROUPS: dict[str, tuple[str, ...]] = {
    src + "->" + "".join(b for a, b in MOVEMENTS if a == src): tuple(
        f"{a}->{b}" for a, b in MOVEMENTS if a == src
    )
    for src in (INITIAL, *VOLUMES)
}


def movement_label(source: str, target: str) -> str:
    return f"{source}->{target}"


def split_label(label: str) -> tuple[str, str]:
    source, target = label.split("->")
    return source, target


def action_of(label: str) -> str:
    """Composite action (``reach-a`` ...) performed by a movement label."""
    return "reach-" + split_label(label)[1].lower()


class IKError(RuntimeError):
    """Inverse kinematics failed to converge."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class UnreachableTargetError(IKError):
    pass


@dataclass(frozen=True)
class ArmModel:
    upper_arm: float = 0.30
    forearm: float = 0.25

    def __post_init__(self):
        if self.upper_arm <= 0 or self.forearm <= 0:
            raise ValueError("link lengths must be positive")

    @property
    def reach_annulus(self) -> tuple[float, float]:
        return abs(self.upper_arm - self.forearm), self.upper_arm + self.forearm


@dataclass(frozen=True)
class Cube:
    name: str
    center: tuple[float, float, float]
    side: float = 0.05


@dataclass(frozen=True)
class WorkspaceSpec:
    cubes: tuple[Cube, ...] = (
        Cube("A", (0.20, -0.30, 0.15)),
        Cube("B", (0.40, -0.10, 0.20)),
        Cube("C", (0.15, 0.05, 0.10)),
    )
    resolution: float = 0.005
    initial_pose: tuple[float, float, float] = (0.0, 0.0, 0.0)
    margin: float = 0.01

    def cube(self, name: str) -> Cube:
        for c in self.cubes:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class DatasetSpec:
    n_per_label: int = 1000
    n_samples: int = 251
    noise_levels: tuple[float, ...] = (0.0, 0.10, 0.30, 0.50)
    seed: int = 0
    dt: float = 0.01


@dataclass
class Dataset:
    """Noise-free trajectories per movement label plus generation metadata."""

    spec: DatasetSpec
    trajectories: dict[str, list[Trajectory]]
    endpoints: dict[str, np.ndarray] = field(default_factory=dict)
    metadata: dict[str, str] = field(default_factory=dict)

    def noisy(self, level: float) -> dict[str, list[Trajectory]]:
        """Copy of every trajectory with uniform noise at ``level``."""
        out = {}
        for label, trajs in self.trajectories.items():
            li = LABELS.index(label)
            out[label] = [
                inject_noise(tr, level, self.spec.seed, traj_id=(li, i))
                for i, tr in enumerate(trajs)
            ]
        return out


def sample_target_grid(cube: Cube, resolution: float = 0.005) -> np.ndarray:
    """Cell-centre grid inside ``cube``, x-major ordering.

    A 0.05 m cube at 0.005 m resolution gives 10 points per axis.
    """
    n = int(round(cube.side / resolution)) if cube.side > 0 else 0
    if n <= 0:
        return np.asarray([cube.center], dtype=float)
    offsets = (np.arange(n) + 0.5) * resolution - cube.side / 2.0
    cx, cy, cz = cube.center
    xs, ys, zs = np.meshgrid(cx + offsets, cy + offsets, cz + offsets, indexing="ij")
    return np.column_stack([xs.ravel(), ys.ravel(), zs.ravel()])


def forward_kinematics(arm: ArmModel, q) -> np.ndarray:
    """Wrist position for joint angles ``q`` (radians)."""
    q1, q2, q3 = np.asarray(q, dtype=float)
    radial = arm.upper_arm * np.cos(q2) + arm.forearm * np.cos(q2 + q3)
    height = arm.upper_arm * np.sin(q2) + arm.forearm * np.sin(q2 + q3)
    return np.array([np.cos(q1) * radial, np.sin(q1) * radial, height])


def elbow_position(arm: ArmModel, q) -> np.ndarray:
    q1, q2, _ = np.asarray(q, dtype=float)
    return arm.upper_arm * np.array([np.cos(q1) * np.cos(q2), np.sin(q1) * np.cos(q2), np.sin(q2)])


def jacobian(arm: ArmModel, q) -> np.ndarray:
    q1, q2, q3 = np.asarray(q, dtype=float)
    l1, l2 = arm.upper_arm, arm.forearm
    c1, s1 = np.cos(q1), np.sin(q1)
    radial = l1 * np.cos(q2) + l2 * np.cos(q2 + q3)
    d_radial_2 = -l1 * np.sin(q2) - l2 * np.sin(q2 + q3)
    d_radial_3 = -l2 * np.sin(q2 + q3)
    d_height_2 = l1 * np.cos(q2) + l2 * np.cos(q2 + q3)
    d_height_3 = l2 * np.cos(q2 + q3)
    return np.array([
        [-s1 * radial, c1 * d_radial_2, c1 * d_radial_3],
        [c1 * radial, s1 * d_radial_2, s1 * d_radial_3],
        [0.0, d_height_2, d_height_3],
    ])


def inverse_kinematics(arm: ArmModel, target, q_init=(0.0, 0.0, 0.0), *,
                       tol: float = 1e-6, max_iter: int = 500,
                       damping: float = 1e-3, max_step: float = 0.2) -> np.ndarray:
    """Damped least-squares IK on the wrist position residual.

    Raises :class:`UnreachableTargetError` when the target lies outside the
    reachable annulus and :class:`IKError` when ``max_iter`` is exhausted.
    """
    target = np.asarray(target, dtype=float)
    inner, outer = arm.reach_annulus
    dist = float(np.linalg.norm(target))
    if not inner <= dist <= outer:
        raise UnreachableTargetError(
            f"target at {dist:.4f} m outside annulus [{inner:.3f}, {outer:.3f}]"
        )
    q = np.array(q_init, dtype=float)
    eye = np.eye(3)
    err = target - forward_kinematics(arm, q)
    for _ in range(max_iter):
        if np.linalg.norm(err) <= tol:
            return q
        J = jacobian(arm, q)
        step = J.T @ np.linalg.solve(J @ J.T + damping**2 * eye, err)
        biggest = np.max(np.abs(step))
        if biggest > max_step:
            step *= max_step / biggest
        q = q + step
        err = target - forward_kinematics(arm, q)
    residual = float(np.linalg.norm(err))
    if residual <= tol:
        return q
    raise IKError(f"no convergence after {max_iter} iterations (residual {residual:.3g} m)", residual)


def min_jerk_profile(q0, q1, n_samples: int) -> np.ndarray:
    """Quintic minimum-jerk interpolation sampled at ``n_samples`` points."""
    if n_samples < 2:
        raise ValueError("need at least two samples")
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    tau = np.linspace(0.0, 1.0, n_samples)
    s = tau**3 * (10.0 - 15.0 * tau + 6.0 * tau**2)
    out = q0 + np.outer(s, q1 - q0)
    out[0], out[-1] = q0, q1
    return out


def _label_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def solve_grid(arm: ArmModel, cube: Cube, resolution: float) -> np.ndarray:
    """IK solutions for every grid point of ``cube``, one row per point.

    The cube centre is solved from a bent nominal pose and each grid point
    is then solved from the centre solution, keeping all solutions on the
    same elbow branch.
    """
    center = np.asarray(cube.center, dtype=float)
    nominal = (np.arctan2(center[1], center[0]), 0.3, 1.0)
    q_center = inverse_kinematics(arm, center, nominal)
    points = sample_target_grid(cube, resolution)
    sols = np.empty_like(points)
    for i, p in enumerate(points):
        try:
            sols[i] = inverse_kinematics(arm, p, q_center)
        except IKError as exc:
            raise IKError(f"cube {cube.name} point {i} {p.tolist()}: {exc}", exc.residual) from exc
    return sols


def generate_dataset(spec: DatasetSpec = DatasetSpec(), workspace: WorkspaceSpec = WorkspaceSpec(),
                     arm: ArmModel = ArmModel()) -> Dataset:
    """Noise-free trajectories for all nine movement labels.

    Start and end poses are IK solutions of grid points; pairings are drawn
    from per-label seeded permutations so the result depends only on
    ``spec.seed``.
    """
    inner, outer = arm.reach_annulus
    solutions = {}
    for cube in workspace.cubes:
        pts = sample_target_grid(cube, workspace.resolution)
        d = np.linalg.norm(pts, axis=1)
        if d.min() < inner + workspace.margin or d.max() > outer - workspace.margin:
            raise UnreachableTargetError(f"cube {cube.name} leaves the reachable annulus")
        solutions[cube.name] = solve_grid(arm, cube, workspace.resolution)

    q_init = np.asarray(workspace.initial_pose, dtype=float)
    trajectories: dict[str, list[Trajectory]] = {}
    endpoints: dict[str, np.ndarray] = {}
    for li, (src, dst) in enumerate(MOVEMENTS):
        label = movement_label(src, dst)
        rng = _label_rng(spec.seed, li)
        n_dst = len(solutions[dst])
        dst_idx = rng.permutation(n_dst)
        dst_idx = np.resize(dst_idx, spec.n_per_label)
        if src == INITIAL:
            starts = np.repeat(q_init[None, :], spec.n_per_label, axis=0)
            src_idx = np.full(spec.n_per_label, -1)
        else:
            src_idx = np.resize(rng.permutation(len(solutions[src])), spec.n_per_label)
            starts = solutions[src][src_idx]
        ends = solutions[dst][dst_idx]
        trajectories[label] = [
            Trajectory(min_jerk_profile(a, b, spec.n_samples), spec.dt, label)
            for a, b in zip(starts, ends)
        ]
        endpoints[label] = np.column_stack([src_idx, dst_idx])

    metadata = {
        "n_per_label": str(spec.n_per_label),
        "n_samples": str(spec.n_samples),
        "seed": str(spec.seed),
        "dt": repr(spec.dt),
        "upper_arm": repr(arm.upper_arm),
        "forearm": repr(arm.forearm),
        "resolution": repr(workspace.resolution),
        "noise_interpretation": "uniform(-a, a), a = level * (max - min) per joint per trajectory",
    }
    return Dataset(spec, trajectories, endpoints, metadata)


def inject_noise(traj: Trajectory, level: float, seed: int, traj_id=(0,)) -> Trajectory:
    """Additive uniform noise scaled by each joint's range over ``traj``."""
    if not 0.0 <= level < 1.0:
        raise ValueError("noise level must lie in [0, 1)")
    if level == 0.0:
        return Trajectory(traj.samples.copy(), traj.dt, traj.label)
    x = traj.samples
    amp = level * (x.max(axis=0) - x.min(axis=0))
    code = int(round(level * 1000))
    rng = _label_rng(seed, *np.atleast_1d(traj_id).tolist(), code)
    noise = rng.uniform(-1.0, 1.0, size=x.shape) * amp
    return Trajectory(x + noise, traj.dt, traj.label)


def pooled(dataset: Dataset, levels=(0.0, 0.10, 0.30)) -> dict[str, list[Trajectory]]:
    """Pool several noise regimes (``D-0-10-30`` by default)."""
    out: dict[str, list[Trajectory]] = {label: [] for label in dataset.trajectories}
    for level in levels:
        for label, trajs in dataset.noisy(level).items():
            out[label].extend(trajs)
    return out


def split_indices(n: int, train_fraction: float = 0.9) -> tuple[range, range]:
    """First ``train_fraction`` of indices train, the rest test."""
    cut = int(round(n * train_fraction))
    return range(cut), range(cut, n)


# -- disk format ---------------------------------------------------------

def label_filename(label: str, level: float) -> str:
    return f"{label.replace('->', '-')}_n{int(round(level * 100)):02d}.csv"


def write_trajectories(path, trajs: list[Trajectory]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["traj_id", "t", "q1", "q2", "q3"])
        for i, tr in enumerate(trajs):
            for t, row in enumerate(tr.samples, start=1):
                w.writerow([i, t, *(f"{v:.7f}" for v in row)])


def read_trajectories(path, label: str | None = None, dt: float = 0.01) -> list[Trajectory]:
    rows: dict[int, list[list[float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["traj_id", "t"]:
            raise ValueError(f"{path}: unexpected header {header}")
        for rec in reader:
            rows.setdefault(int(rec[0]), []).append([float(v) for v in rec[2:]])
    return [Trajectory(np.asarray(rows[k]), dt, label) for k in sorted(rows)]


def write_dataset(dataset: Dataset, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for level in dataset.spec.noise_levels:
        for label, trajs in dataset.noisy(level).items():
            path = out_dir / label_filename(label, level)
            write_trajectories(path, trajs)
            written.append(path)
    meta = dict(dataset.metadata)
    meta["noise_levels"] = ",".join(repr(v) for v in dataset.spec.noise_levels)
    meta["labels"] = ",".join(LABELS)
    digest = hashlib.sha256()
    for p in written:
        digest.update(p.read_bytes())
    meta["sha256"] = digest.hexdigest()
    with open(out_dir / "dataset.meta", "w", encoding="utf-8") as fh:
        for k in sorted(meta):
            fh.write(f"{k}={meta[k]}\n")
    written.append(out_dir / "dataset.meta")
    return written
