"""Command-line entry point: ``movact <subcommand> [flags]``.

Exit codes: 0 success, 1 I/O failure, 2 domain error, 3 bad flags.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from movact import simgen
from movact.allen import CompositionTable, Default, Mode, Relation, format_tables, load_tables
from movact.dynamics import (
    GenerativeClassifier,
    InsufficientDataError,
    LabelDynamics,
    Trajectory,
    classify_window,
    fit_dynamics,
    forecast,
    load_model,
    save_model,
)
from movact.metrics import (
    IncrementalPrefix,
    SlidingWindow,
    benchmark,
    evaluate_actions,
    evaluate_motion,
    write_accuracy_table,
    write_confusion,
    write_motion_table,
    write_prefix_curve,
)
from movact.segmenter import (
    AllenGate,
    DegenerateBeliefError,
    FilterConfig,
    FilterState,
    InfeasibleError,
    SegmentModel,
    build_segment_model,
    filter_step,
    load_segment_model,
    map_segmentation,
    run_online,
    save_segment_model,
)
from movact.simgen import IKError

log = logging.getLogger("movact")

EXIT_OK, EXIT_IO, EXIT_DOMAIN, EXIT_FLAGS = 0, 1, 2, 3
DATASETS = {"D0": (0.0,), "D01030": (0.0, 0.10, 0.30)}
SEGMENT_FILE = "segment.model"
TABLE_FILE = "reaching.table"


class FlagError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FLAGS, f"{self.prog}: error: {message}\n")


# -- reaching task structure ---------------------------------------------

def reaching_table(labels: Sequence[str] = simgen.LABELS) -> CompositionTable:
    """Endpoint continuity: ``x->y`` may precede ``y->z`` and nothing else."""
    entries = {
        (a, b): {Relation.BEFORE: 1.0}
        for a in labels for b in labels
        if simgen.split_label(a)[1] == simgen.split_label(b)[0]
    }
    return CompositionTable(entries, Mode.HARD, Default.NONE)


def reaching_segment_model(labels: Sequence[str] = simgen.LABELS, n_samples: int = 251,
                           sigma: float = 5.0, spread: int = 20) -> SegmentModel:
    """Near-fixed movement durations, continuity-masked transitions, start at the initial pose."""
    L = len(labels)
    tr = np.zeros((L, L))
    for i, a in enumerate(labels):
        succ = [j for j, b in enumerate(labels) if simgen.split_label(a)[1] == simgen.split_label(b)[0]]
        if succ:
            tr[i, succ] = 1.0 / len(succ)
        else:
            tr[i, i] = 1.0
    ini = np.array([simgen.split_label(lab)[0] == simgen.INITIAL for lab in labels], dtype=float)
    ini /= ini.sum()
    lo, hi = max(2, n_samples - spread), n_samples + spread
    durations = {lab: ("gaussian", float(n_samples), sigma, lo, hi) for lab in labels}
    return build_segment_model(labels, durations, tr, ini)


def demo_config(models: Sequence[LabelDynamics], seg: SegmentModel, table: CompositionTable,
                horizon: int = 50, threshold: float = 0.5, fallback: bool = True) -> FilterConfig:
    cfg = FilterConfig(seg, models, table=table, horizon=horizon, switch_threshold=threshold, fallback=fallback)
    cfg.gate = AllenGate(seg.labels, table, seg.d_max, cfg.start_guard)
    return cfg


@dataclass(frozen=True)
class DemoSequence:
    samples: np.ndarray
    labels: tuple[str, ...]
    n_samples: int

    def bounds(self, k: int) -> tuple[int, int]:
        """1-based inclusive sample range of movement ``k``."""
        return k * self.n_samples + 1, (k + 1) * self.n_samples


def demo_sequence(seed: int, n_movements: int = 15, n_samples: int = 251,
                  solutions: Mapping[str, np.ndarray] | None = None,
                  workspace: simgen.WorkspaceSpec = simgen.WorkspaceSpec(),
                  arm: simgen.ArmModel = simgen.ArmModel()) -> DemoSequence:
    """Chain of reaches starting at the initial pose.

    Each target volume is drawn uniformly from the volumes other than the
    current one and each reach starts where the previous one ended.
    """
    if solutions is None:
        solutions = {c.name: simgen.solve_grid(arm, c, workspace.resolution) for c in workspace.cubes}
    rng = np.random.default_rng(np.random.SeedSequence([seed, 15]))
    here, q = simgen.INITIAL, np.asarray(workspace.initial_pose, dtype=float)
    parts, labels = [], []
    for _ in range(n_movements):
        dst = str(rng.choice([v for v in simgen.VOLUMES if v != here]))
        q_next = solutions[dst][rng.integers(len(solutions[dst]))]
        parts.append(simgen.min_jerk_profile(q, q_next, n_samples))
        labels.append(simgen.movement_label(here, dst))
        here, q = dst, q_next
    return DemoSequence(np.vstack(parts), tuple(labels), n_samples)


@dataclass(frozen=True)
class DemoRow:
    movement: str
    predicted: str
    vote_share: float
    truth: str

    @property
    def correct(self) -> bool:
        return self.predicted == self.truth


def demo_report(seq: DemoSequence, lstar: np.ndarray, labels: Sequence[str]) -> list[DemoRow]:
    """Per movement: majority action over per-step MAP labels and its vote share."""
    actions = sorted({simgen.action_of(lab) for lab in labels})
    rows = []
    for k, mov in enumerate(seq.labels):
        s, e = seq.bounds(k)
        votes = [simgen.action_of(labels[i]) for i in lstar[s - 1:e]]
        counts = {a: votes.count(a) for a in actions}
        best = max(counts.values())
        winner = next(a for a in actions if counts[a] == best)
        rows.append(DemoRow(mov, winner, best / len(votes), simgen.action_of(mov)))
    return rows


def continuity_violation_mass(before: FilterState, after: FilterState, labels: Sequence[str],
                              guard: int = 0) -> float:
    """Posterior mass after one step on cells that break endpoint continuity.

    Cells of the open segment must follow the last closed segment (or start
    at the initial pose when none is closed); cells started after the open
    segment must follow the open label.
    """
    def follows(prev: str | None, lab: str) -> bool:
        src = simgen.split_label(lab)[0]
        return src == simgen.INITIAL if prev is None else simgen.split_label(prev)[1] == src

    alpha = after.alpha
    D = alpha.shape[1]
    if before.open_start is None:
        ok = np.array([follows(None, lab) for lab in labels])
        return float(alpha[~ok].sum())
    k = max(min(after.t - before.open_start - guard, D), 0)
    prev = before.closed[-1].label if before.closed else None
    old_ok = np.array([follows(prev, lab) for lab in labels])
    new_ok = np.array([follows(labels[before.open_label], lab) for lab in labels])
    return float(alpha[~old_ok, k:].sum() + alpha[~new_ok, :k].sum())


# -- file helpers --------------------------------------------------------

def model_filename(label: str) -> str:
    return label.replace("->", "-") + ".model"


def load_models(model_dir, labels: Sequence[str] = simgen.LABELS) -> list[LabelDynamics]:
    return [load_model(Path(model_dir) / model_filename(lab)) for lab in labels]


def load_split(data_dir, dataset: str):
    """Train/test trajectories per label; the split is by trajectory index, identical across noise levels."""
    train: dict[str, list[Trajectory]] = {}
    test: dict[str, list[Trajectory]] = {}
    ids: dict[str, tuple[range, range]] = {}
    for lab in simgen.LABELS:
        train[lab], test[lab] = [], []
        for level in DATASETS[dataset]:
            trajs = simgen.read_trajectories(Path(data_dir) / simgen.label_filename(lab, level), lab)
            tr, te = simgen.split_indices(len(trajs))
            train[lab] += [trajs[i] for i in tr]
            test[lab] += [trajs[i] for i in te]
            ids[lab] = (tr, te)
    return train, test, ids


def config_hash(args: argparse.Namespace) -> str:
    items = sorted((k, str(v)) for k, v in vars(args).items() if k != "func")
    return hashlib.sha256(repr(items).encode()).hexdigest()[:16]


def write_meta(path, args: argparse.Namespace, **extra) -> None:
    meta = {k: str(v) for k, v in vars(args).items() if k != "func"}
    meta["config_hash"] = config_hash(args)
    meta.update({k: str(v) for k, v in extra.items()})
    with open(str(path) + ".meta", "w", encoding="utf-8") as fh:
        for k in sorted(meta):
            fh.write(f"{k}={meta[k]}\n")


def read_config(path) -> dict[str, str]:
    out = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FlagError(f"config line {raw!r} is not key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _read_stream(path) -> np.ndarray:
    trajs = simgen.read_trajectories(path)
    return np.vstack([t.samples for t in trajs])


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require(*paths) -> None:
    for p in paths:
        if p is not None and not Path(p).exists():
            raise FileNotFoundError(f"{p} does not exist")


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise FlagError(message)


# -- subcommands ---------------------------------------------------------

def cmd_generate(args) -> int:
    _check(args.n >= 1 and args.t >= 2, "--n must be >= 1 and --t >= 2")
    levels = tuple(float(v) for v in args.noise_levels.split(","))
    _check(all(0.0 <= v < 1.0 for v in levels), "noise levels must lie in [0, 1)")
    spec = simgen.DatasetSpec(n_per_label=args.n, n_samples=args.t, noise_levels=levels, seed=args.seed)
    ds = simgen.generate_dataset(spec)
    written = simgen.write_dataset(ds, _out(args))
    print(f"wrote {len(written)} files to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    _check(args.dataset in DATASETS, f"--dataset must be one of {sorted(DATASETS)}")
    _check(args.order >= 1, "--order must be >= 1")
    _require(args.data)
    train, _, ids = load_split(args.data, args.dataset)
    out = _out(args)
    for lab in simgen.LABELS:
        model = fit_dynamics(train[lab], order=args.order, ridge=args.ridge, var_floor=args.var_floor,
                             label=lab, dataset=args.dataset)
        save_model(model, out / model_filename(lab))
    n_samples = len(train[simgen.LABELS[0]][0])
    save_segment_model(reaching_segment_model(simgen.LABELS, n_samples), out / SEGMENT_FILE)
    (out / TABLE_FILE).write_text("mode=HARD default=NONE\n" + format_tables({0: reaching_table()}), encoding="utf-8")
    with open(out / "split.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "traj_id", "part"])
        for lab, (tr, te) in ids.items():
            w.writerows([lab, i, "train"] for i in tr)
            w.writerows([lab, i, "test"] for i in te)
    write_meta(out / "split.csv", args)
    print(f"trained {len(simgen.LABELS)} models on {args.dataset} into {args.out}")
    return EXIT_OK


def _filter_inputs(args):
    _require(args.models, args.stream)
    models = load_models(args.models)
    seg_path = Path(args.segment) if args.segment else Path(args.models) / SEGMENT_FILE
    table_path = Path(args.table) if args.table else Path(args.models) / TABLE_FILE
    _require(seg_path)
    seg = load_segment_model(seg_path)
    table = load_tables(table_path).get(0) if table_path.exists() else None
    return models, seg, table


def cmd_filter(args) -> int:
    _check(0.0 < args.threshold < 1.0, "--threshold must lie in (0, 1)")
    _check(args.horizon >= 0, "--horizon must be >= 0")
    models, seg, table = _filter_inputs(args)
    x = _read_stream(args.stream)
    cfg = FilterConfig(seg, models, table=table, horizon=args.horizon, switch_threshold=args.threshold,
                       fallback=not args.no_fallback)
    if table is not None:
        cfg.gate = AllenGate(seg.labels, table, seg.d_max, cfg.start_guard)
    tl = run_online(x, cfg)
    out = _out(args)
    tl.to_csv(out / "timeline.csv")
    write_meta(out / "timeline.csv", args)
    if args.horizon > 0:
        tl.forecasts_to_csv(out / "forecasts.csv")
    print(f"filtered {x.shape[0]} samples, {len(tl.intervals)} segments")
    return EXIT_OK


def cmd_recognize(args) -> int:
    models, seg, table = _filter_inputs(args)
    x = _read_stream(args.stream)
    res = map_segmentation(x, seg, models, table)
    out = _out(args)
    with open(out / "segments.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "start", "end"])
        w.writerows([iv.label, iv.start, iv.end] for iv in res.intervals)
    write_meta(out / "segments.csv", args, log_score=repr(res.log_score))
    for iv in res.intervals:
        print(f"{iv.label} {iv.start} {iv.end}")
    return EXIT_OK


def cmd_eval_motion(args) -> int:
    _check(args.dataset in DATASETS, f"--dataset must be one of {sorted(DATASETS)}")
    _check(args.window >= 1 and args.horizon >= 1 and args.stride >= 1, "window, horizon and stride must be >= 1")
    _require(args.data, args.models)
    _, test, _ = load_split(args.data, args.dataset)
    models = dict(zip(simgen.LABELS, load_models(args.models)))
    res = evaluate_motion(models, test, args.window, args.horizon, args.stride)
    path = _out(args) / f"motion_{args.dataset}.csv"
    write_motion_table(path, res)
    write_meta(path, args, pcc_pooling="per trajectory over all windows, then mean/std over trajectories")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_eval_action(args) -> int:
    _check(args.dataset in DATASETS, f"--dataset must be one of {sorted(DATASETS)}")
    _check(args.window > 0 and args.step > 0, "--window and --step must be positive")
    _require(args.data, args.models)
    _, test, _ = load_split(args.data, args.dataset)
    models = dict(zip(simgen.LABELS, load_models(args.models)))
    out = _out(args)
    protocols = {"window": SlidingWindow(args.window, 1), "prefix": IncrementalPrefix(args.step)}
    chosen = list(protocols) if args.protocol == "both" else [args.protocol]
    for name in chosen:
        results = {}
        for group, labs in simgen.CLASSIFIER_GROUPS.items():
            clf = GenerativeClassifier({lab: models[lab] for lab in labs}, name=group)
            r = evaluate_actions(clf, {lab: test[lab] for lab in labs}, protocols[name])
            results[group] = r
            stem = f"{group.replace('->', '-')}_{args.dataset}_{name}"
            write_confusion(out / f"confusion_{stem}.csv", r)
            if name == "prefix":
                write_prefix_curve(out / f"prefix_{stem}.csv", r)
                write_meta(out / f"prefix_{stem}.csv", args, plateau_onset=r.plateau_onset)
        path = out / f"accuracy_{args.dataset}_{name}.csv"
        write_accuracy_table(path, results)
        write_meta(path, args)
        for group, r in results.items():
            print(f"{name} {group} accuracy={r.accuracy:.4f}")
    return EXIT_OK


def cmd_demo(args) -> int:
    _check(args.movements >= 1 and args.sequences >= 1, "--movements and --sequences must be >= 1")
    _require(args.models)
    models = load_models(args.models)
    seg_path = Path(args.models) / SEGMENT_FILE
    seg = load_segment_model(seg_path) if seg_path.exists() else reaching_segment_model()
    table = reaching_table()
    cfg = demo_config(models, seg, table, horizon=args.horizon, fallback=not args.no_fallback)
    ws, arm = simgen.WorkspaceSpec(), simgen.ArmModel()
    sols = {c.name: simgen.solve_grid(arm, c, ws.resolution) for c in ws.cubes}
    out = _out(args)
    path = out / "demo.csv"
    total = correct = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["sequence", "movement", "predicted", "vote_share", "truth"])
        for s in range(args.sequences):
            seq = demo_sequence(args.seed + s, args.movements, seg_n_samples(seg), sols)
            tl = run_online(seq.samples, cfg, keep_forecasts=False)
            for row in demo_report(seq, tl.lstar, seg.labels):
                w.writerow([s, row.movement, row.predicted, f"{row.vote_share:.2f}", row.truth])
                total += 1
                correct += row.correct
                if args.sequences == 1:
                    print(f"{row.movement:6s} {row.predicted:8s} {row.vote_share:.2f} {row.truth}")
    write_meta(path, args, accuracy=f"{correct / total:.4f}")
    print(f"majority-vote accuracy {correct}/{total}")
    return EXIT_OK


def seg_n_samples(seg: SegmentModel) -> int:
    """Modal duration of the first label, the nominal movement length."""
    return int(np.argmax(seg.durations[0])) + 1


def cmd_bench(args) -> int:
    _check(args.reps >= 10, "--reps must be >= 10")
    _require(args.models)
    models = load_models(args.models)
    ds = simgen.generate_dataset(simgen.DatasetSpec(n_per_label=1, seed=args.seed))
    out = _out(args)
    path = out / f"bench_{args.op}.csv"
    rows = []
    if args.op == "filter_step":
        seg = reaching_segment_model()
        cfg = demo_config(models, seg, reaching_table(), horizon=args.horizon)
        x = ds.trajectories[simgen.LABELS[0]][0].samples
        state = FilterState()
        for row in x[:120]:
            state = filter_step(state, cfg, row).state
        r = benchmark(lambda: filter_step(state, cfg, x[120]), args.reps)
        rows.append(("all", r))
    for lab, m in zip(simgen.LABELS, models):
        x = ds.trajectories[lab][0].samples
        if args.op == "forecast":
            r = benchmark(lambda: forecast(m, x[:100], args.horizon), args.reps)
        elif args.op == "classify":
            group = next(g for g, labs in simgen.CLASSIFIER_GROUPS.items() if lab in labs)
            cand = [models[simgen.LABELS.index(c)] for c in simgen.CLASSIFIER_GROUPS[group]]
            r = benchmark(lambda: classify_window(cand, x[100:110]), args.reps)
        else:
            continue
        rows.append((lab, r))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "mean_s", "std_s", "reps"])
        for lab, r in rows:
            w.writerow([lab, f"{r.mean:.3e}", f"{r.std:.3e}", r.reps])
            print(f"{lab:6s} {r.mean:.3e} s +- {r.std:.3e}")
    write_meta(path, args)
    return EXIT_OK


# -- parser --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master random seed")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--config", help="key=value file supplying flag defaults")

    p = _Parser(prog="movact", description="Reaching-movement simulation, forecasting and recognition.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="simulate labelled reaching datasets")
    g.add_argument("--n", type=int, default=1000, help="trajectories per label")
    g.add_argument("--t", type=int, default=251, help="samples per trajectory")
    g.add_argument("--noise-levels", default="0,0.1,0.3,0.5", help="comma-separated noise fractions")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", parents=[common], help="fit per-label dynamics and the segment model")
    t.add_argument("--data", required=True, help="dataset directory from generate")
    t.add_argument("--dataset", default="D0", help="D0 or D01030")
    t.add_argument("--order", type=int, default=3, help="autoregressive order")
    t.add_argument("--ridge", type=float, default=0.0, help="ridge penalty per data row")
    t.add_argument("--var-floor", type=float, default=1e-12, help="minimum residual variance")
    t.set_defaults(func=cmd_train)

    for name, func, text in (("filter", cmd_filter, "run the on-line filter over a stream"),
                             ("recognize", cmd_recognize, "MAP segmentation of a stream")):
        f = sub.add_parser(name, parents=[common], help=text)
        f.add_argument("--models", required=True, help="directory of trained models")
        f.add_argument("--stream", required=True, help="trajectory CSV; all rows are concatenated")
        f.add_argument("--segment", help="segment model file (default: <models>/segment.model)")
        f.add_argument("--table", help="composition table file (default: <models>/reaching.table)")
        if name == "filter":
            f.add_argument("--horizon", type=int, default=50, help="forecast steps")
            f.add_argument("--threshold", type=float, default=0.5, help="boundary mass threshold")
            f.add_argument("--no-fallback", action="store_true", help="fail instead of ungated update")
        f.set_defaults(func=func)

    for name, func, text in (("eval-motion", cmd_eval_motion, "forecast PCC/RMSE table"),
                             ("eval-action", cmd_eval_action, "action classification accuracy")):
        e = sub.add_parser(name, parents=[common], help=text)
        e.add_argument("--data", required=True, help="dataset directory")
        e.add_argument("--models", required=True, help="directory of trained models")
        e.add_argument("--dataset", default="D0", help="D0 or D01030")
        if name == "eval-motion":
            e.add_argument("--window", type=int, default=100, help="history window W")
            e.add_argument("--horizon", type=int, default=50, help="forecast horizon P")
            e.add_argument("--stride", type=int, default=1, help="window stride")
        else:
            e.add_argument("--protocol", choices=("window", "prefix", "both"), default="both")
            e.add_argument("--window", type=int, default=10, help="sliding window size")
            e.add_argument("--step", type=int, default=10, help="prefix length step")
        e.set_defaults(func=func)

    d = sub.add_parser("demo", parents=[common], help="chained reaching sequence report")
    d.add_argument("--models", required=True, help="directory of trained models")
    d.add_argument("--movements", type=int, default=15, help="movements per sequence")
    d.add_argument("--sequences", type=int, default=1, help="number of seeded sequences")
    d.add_argument("--horizon", type=int, default=50, help="forecast steps per filter step")
    d.add_argument("--no-fallback", action="store_true", help="fail instead of ungated update")
    d.set_defaults(func=cmd_demo)

    b = sub.add_parser("bench", parents=[common], help="time forecasting, classification or filtering")
    b.add_argument("--models", required=True, help="directory of trained models")
    b.add_argument("--op", choices=("forecast", "classify", "filter_step"), default="forecast")
    b.add_argument("--reps", type=int, default=100, help="repetitions, first 3 discarded")
    b.add_argument("--horizon", type=int, default=50, help="forecast steps")
    b.set_defaults(func=cmd_bench)
    p.subcommands = sub.choices
    return p


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Parse flags; a ``--config`` file supplies defaults that explicit flags override."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        values = read_config(args.config)
    except OSError as exc:
        parser.exit(EXIT_IO, f"movact: cannot read config: {exc}\n")
    except FlagError as exc:
        parser.error(str(exc))
    sub = parser.subcommands[args.command]
    actions = {a.dest: a for a in sub._actions}
    unknown = sorted(set(values) - set(actions) - {"command"})
    if unknown:
        parser.error(f"unknown config keys: {', '.join(unknown)}")
    defaults = {}
    for key, raw in values.items():
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes")
        else:
            defaults[key] = raw  # string defaults go through the flag's type conversion
        action.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = parse_args(argv)
    try:
        return args.func(args)
    except FlagError as exc:
        print(f"movact: error: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    except (IKError, InsufficientDataError, DegenerateBeliefError, InfeasibleError, ValueError) as exc:
        print(f"movact: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"movact: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
