"""Multi-level action hierarchies and parent/child composition scoring."""
from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from movact.allen import (
    ALL_PAIRS,
    ActionInterval,
    CompositionTable,
    Configuration,
    Default,
    Mode,
    PairPolicy,
    check_configuration,
    parse_header,
    parse_table_lines,
)


class AmbiguousLabelError(ValueError):
    """Two intervals of a single chain cover the same instant."""


class UnknownParentLabelError(KeyError):
    pass


@dataclass(frozen=True)
class LevelSpec:
    level: int
    labels: frozenset[str]
    table: CompositionTable = field(default_factory=CompositionTable)

    def __post_init__(self):
        object.__setattr__(self, "labels", frozenset(self.labels))
        if not self.labels:
            raise ValueError(f"level {self.level} has no labels")


@dataclass(frozen=True)
class HierarchySpec:
    levels: tuple[LevelSpec, ...]
    catalog: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        levels = tuple(sorted(self.levels, key=lambda lv: lv.level))
        object.__setattr__(self, "levels", levels)
        if [lv.level for lv in levels] != list(range(len(levels))):
            raise ValueError("levels must be contiguous from 0")
        catalog = {k: tuple(v) for k, v in self.catalog.items()}
        object.__setattr__(self, "catalog", catalog)
        for parent, children in catalog.items():
            h = self.level_of(parent)
            if h == 0:
                raise ValueError(f"level-0 label {parent!r} cannot have children")
            below = self.levels[h - 1].labels
            missing = [c for c in children if c not in below]
            if missing:
                raise ValueError(f"catalog of {parent!r} names unknown level-{h - 1} labels {missing}")
        for lv in levels:
            ref = lv.labels if lv.level == 0 else levels[lv.level - 1].labels
            unknown = lv.table.labels() - ref
            if unknown:
                raise ValueError(f"table of level {lv.level} references unknown labels {sorted(unknown)}")

    @property
    def height(self) -> int:
        return len(self.levels) - 1

    def level_of(self, label: str) -> int:
        for lv in self.levels:
            if label in lv.labels:
                return lv.level
        raise KeyError(label)


@dataclass(frozen=True)
class AnnotatedNode:
    interval: ActionInterval
    level: int
    children: tuple["AnnotatedNode", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        for c in self.children:
            if c.level != self.level - 1:
                raise ValueError("child level must be parent level - 1")
        if self.level == 0 and self.children:
            raise ValueError("level-0 nodes have no children")

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def shifted(self, delta: int) -> "AnnotatedNode":
        return AnnotatedNode(self.interval.shifted(delta), self.level,
                             tuple(c.shifted(delta) for c in self.children))


def time_to_label(config: Configuration, t: int) -> str | None:
    """Label of the interval covering instant ``t`` (inclusive endpoints)."""
    hits = [iv for iv in config.intervals if iv.start <= t <= iv.end]
    if len(hits) > 1:
        raise AmbiguousLabelError(f"instant {t} covered by {len(hits)} intervals")
    return hits[0].label if hits else None


def _children_in_order(node: AnnotatedNode) -> list[ActionInterval]:
    return sorted((c.interval for c in node.children), key=lambda iv: (iv.start, iv.end, iv.label))


def structure_ok(parent: AnnotatedNode, hierarchy: HierarchySpec) -> bool:
    """Catalog membership, containment and hull conditions."""
    label = parent.interval.label
    if label not in hierarchy.catalog:
        raise UnknownParentLabelError(label)
    kids = _children_in_order(parent)
    if Counter(iv.label for iv in kids) != Counter(hierarchy.catalog[label]):
        return False
    if not kids:
        return False
    p = parent.interval
    if any(iv.start < p.start or iv.end > p.end for iv in kids):
        return False
    return p.start == min(iv.start for iv in kids) and p.end == max(iv.end for iv in kids)


def psi_C(parent: AnnotatedNode, hierarchy: HierarchySpec, pairs: PairPolicy = ALL_PAIRS) -> float:
    """Composition consistency of a parent node with its children.

    Structural violations give 0 in either mode; otherwise the score is the
    child-pair admissibility under the parent level's table, with children
    taken in temporal order.
    """
    if parent.level < 1:
        raise ValueError("psi_C is defined for levels >= 1")
    if not structure_ok(parent, hierarchy):
        return 0.0
    table = hierarchy.levels[parent.level].table
    config = Configuration(parent.level - 1, tuple(_children_in_order(parent)))
    return check_configuration(config, table, pairs).score


@dataclass(frozen=True)
class HierarchyReport:
    score: float
    violations: tuple[tuple[AnnotatedNode, float], ...] = ()
    warnings: tuple[str, ...] = ()


def validate_hierarchy(roots: Sequence[AnnotatedNode], hierarchy: HierarchySpec,
                       pairs: PairPolicy = ALL_PAIRS) -> HierarchyReport:
    """Product of ``psi_C`` over every node at level >= 1 in the forest."""
    score = 1.0
    bad = []
    by_level: dict[int, list[ActionInterval]] = {}
    for root in roots:
        for node in root.walk():
            if node.level >= 1:
                by_level.setdefault(node.level, []).append(node.interval)
                s = psi_C(node, hierarchy, pairs)
                score *= s
                if s == 0.0:
                    bad.append((node, s))
    notes = []
    for h, ivs in sorted(by_level.items()):
        ivs = sorted(ivs, key=lambda iv: iv.start)
        for a, b in zip(ivs, ivs[1:]):
            if b.start <= a.end:
                notes.append(f"level {h}: {a.label}[{a.start},{a.end}] overlaps {b.label}[{b.start},{b.end}]")
    for n in notes:
        warnings.warn(n, stacklevel=2)
    return HierarchyReport(score, tuple(bad), tuple(notes))


# -- hierarchy files -----------------------------------------------------

def parse_hierarchy(text: str) -> HierarchySpec:
    """Read the sectioned hierarchy format.

    ``[level h] labels=a,b`` declares a level, ``[catalog] parent=p
    children=a,b`` a child multiset; every other non-comment line is a
    composition-table line or a ``mode=.. default=..`` header.
    """
    labels: dict[int, list[str]] = {}
    catalog: dict[str, tuple[str, ...]] = {}
    table_lines = []
    mode, default = Mode.HARD, Default.ALL
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[level"):
            head, _, rest = line.partition("]")
            h = int(head[len("[level"):].strip())
            fields = dict(tok.split("=", 1) for tok in rest.split())
            labels[h] = [s for s in fields.get("labels", "").split(",") if s]
        elif line.startswith("[catalog]"):
            fields = dict(tok.split("=", 1) for tok in line[len("[catalog]"):].split())
            catalog[fields["parent"]] = tuple(s for s in fields.get("children", "").split(",") if s)
        elif line.startswith("mode=") or line.startswith("default="):
            mode, default = parse_header(line)
        else:
            table_lines.append(line)
    tables = parse_table_lines(table_lines, mode, default)
    levels = tuple(
        LevelSpec(h, frozenset(labs), tables.get(h, CompositionTable(mode=mode, default=default)))
        for h, labs in sorted(labels.items())
    )
    return HierarchySpec(levels, catalog)


def load_hierarchy(path) -> HierarchySpec:
    return parse_hierarchy(Path(path).read_text(encoding="utf-8"))

