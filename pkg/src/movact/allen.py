"""Allen interval relations, composition tables and configuration checks."""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union


class Relation(enum.Enum):
    BEFORE = "BEFORE"
    MEETS = "MEETS"
    OVERLAPS = "OVERLAPS"
    STARTS = "STARTS"
    DURING = "DURING"
    FINISHES = "FINISHES"
    EQUALS = "EQUALS"
    AFTER = "AFTER"
    MET_BY = "MET_BY"
    OVERLAPPED_BY = "OVERLAPPED_BY"
    STARTED_BY = "STARTED_BY"
    CONTAINS = "CONTAINS"
    FINISHED_BY = "FINISHED_BY"


_CONVERSE = {
    Relation.BEFORE: Relation.AFTER,
    Relation.MEETS: Relation.MET_BY,
    Relation.OVERLAPS: Relation.OVERLAPPED_BY,
    Relation.STARTS: Relation.STARTED_BY,
    Relation.DURING: Relation.CONTAINS,
    Relation.FINISHES: Relation.FINISHED_BY,
    Relation.EQUALS: Relation.EQUALS,
}
_CONVERSE.update({v: k for k, v in list(_CONVERSE.items())})


def converse(r: Relation) -> Relation:
    return _CONVERSE[r]


@dataclass(frozen=True)
class ActionInterval:
    """Labelled interval with inclusive sample-index endpoints."""

    label: str
    start: int
    end: int

    def __post_init__(self):
        if not 1 <= self.start < self.end:
            raise ValueError(f"invalid interval [{self.start}, {self.end}]: need 1 <= start < end")

    @property
    def duration(self) -> int:
        return self.end - self.start + 1

    def shifted(self, delta: int) -> "ActionInterval":
        return ActionInterval(self.label, self.start + delta, self.end + delta)


def relation_from_bounds(sa: int, ea: int, sb: int, eb: int) -> Relation:
    """Allen relation of ``[sa, ea]`` to ``[sb, eb]`` from endpoint comparisons."""
    if ea < sb:
        return Relation.BEFORE
    if eb < sa:
        return Relation.AFTER
    if ea == sb:
        return Relation.MEETS
    if eb == sa:
        return Relation.MET_BY
    # the intervals now share more than a single point
    if sa == sb:
        if ea == eb:
            return Relation.EQUALS
        return Relation.STARTS if ea < eb else Relation.STARTED_BY
    if ea == eb:
        return Relation.FINISHES if sa > sb else Relation.FINISHED_BY
    if sa < sb:
        return Relation.OVERLAPS if ea < eb else Relation.CONTAINS
    return Relation.DURING if ea < eb else Relation.OVERLAPPED_BY


def classify_relation(a: ActionInterval, b: ActionInterval) -> Relation:
    return relation_from_bounds(a.start, a.end, b.start, b.end)


class Mode(enum.Enum):
    HARD = "HARD"
    SOFT = "SOFT"


class Default(enum.Enum):
    ALL = "ALL"
    NONE = "NONE"


@dataclass(frozen=True)
class CompositionTable:
    """Admissible relations per ordered label pair.

    ``entries`` maps ``(label_i, label_j)`` to ``{Relation: weight}``.
    Pairs without an entry are resolved by ``default``.
    """

    entries: Mapping[tuple[str, str], Mapping[Relation, float]] = field(default_factory=dict)
    mode: Mode = Mode.HARD
    default: Default = Default.ALL

    def __post_init__(self):
        frozen = {}
        for pair, rels in self.entries.items():
            clean = {}
            for rel, w in rels.items():
                rel = Relation(rel)
                w = float(w)
                if not 0.0 < w <= 1.0:
                    raise ValueError(f"weight {w} for {pair} {rel.value} outside (0, 1]")
                clean[rel] = 1.0 if self.mode is Mode.HARD else w
            frozen[tuple(pair)] = clean
        object.__setattr__(self, "entries", frozen)

    @classmethod
    def from_pairs(cls, admissible: Mapping[tuple[str, str], Iterable], mode: Mode = Mode.HARD,
                   default: Default = Default.ALL) -> "CompositionTable":
        """Build from ``{pair: relations}`` or ``{pair: {relation: weight}}``."""
        entries = {}
        for pair, rels in admissible.items():
            if isinstance(rels, Mapping):
                entries[pair] = dict(rels)
            else:
                entries[pair] = {Relation(r): 1.0 for r in rels}
        return cls(entries, mode, default)

    def weight(self, label_i: str, label_j: str, rel: Relation) -> float:
        rels = self.entries.get((label_i, label_j))
        if rels is None:
            return 1.0 if self.default is Default.ALL else 0.0
        return rels.get(rel, 0.0)

    def labels(self) -> set[str]:
        return {lab for pair in self.entries for lab in pair}

    def asymmetries(self) -> list[tuple[str, str, Relation]]:
        """Entries whose converse is missing from the reversed pair."""
        out = []
        for (li, lj), rels in self.entries.items():
            for rel in rels:
                back = self.entries.get((lj, li))
                if back is None:
                    if self.default is Default.ALL:
                        continue
                    out.append((li, lj, rel))
                elif converse(rel) not in back:
                    out.append((li, lj, rel))
        return out

    def validate(self) -> list[str]:
        msgs = [f"asymmetric entry: ({li}, {lj}) admits {rel.value} but the converse is not admitted"
                for li, lj, rel in self.asymmetries()]
        for m in msgs:
            warnings.warn(m, stacklevel=2)
        return msgs


def plausibility(a: ActionInterval, b: ActionInterval, table: CompositionTable) -> float:
    """0/1 admissibility in HARD mode, the stored weight in SOFT mode."""
    return table.weight(a.label, b.label, classify_relation(a, b))


@dataclass(frozen=True)
class Configuration:
    level: int
    intervals: tuple[ActionInterval, ...] = ()

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")
        object.__setattr__(self, "intervals", tuple(self.intervals))


ALL_PAIRS = "all"
CONSECUTIVE = "consecutive"
PairPolicy = Union[str, Sequence[tuple[int, int]]]


def select_pairs(n: int, pairs: PairPolicy = ALL_PAIRS) -> list[tuple[int, int]]:
    if isinstance(pairs, str):
        if pairs == ALL_PAIRS:
            return list(combinations(range(n), 2))
        if pairs == CONSECUTIVE:
            return [(i, i + 1) for i in range(n - 1)]
        raise ValueError(f"unknown pair policy {pairs!r}")
    out = [tuple(p) for p in pairs]
    for i, j in out:
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise IndexError(f"pair ({i}, {j}) out of range for {n} intervals")
    return out


@dataclass(frozen=True)
class AdmissibilityReport:
    score: float
    violations: tuple[tuple[int, int, Relation], ...] = ()

    @property
    def admissible(self) -> bool:
        return not self.violations


def check_configuration(config: Configuration, table: CompositionTable,
                        pairs: PairPolicy = ALL_PAIRS) -> AdmissibilityReport:
    """Product of pairwise plausibility over the selected index pairs."""
    iv = config.intervals
    score = 1.0
    violations = []
    for i, j in select_pairs(len(iv), pairs):
        rel = classify_relation(iv[i], iv[j])
        w = table.weight(iv[i].label, iv[j].label, rel)
        score *= w
        if w == 0.0:
            violations.append((i, j, rel))
    return AdmissibilityReport(score, tuple(violations))


# -- table files ---------------------------------------------------------

def parse_header(line: str) -> tuple[Mode, Default]:
    fields = dict(tok.split("=", 1) for tok in line.split())
    return Mode(fields.get("mode", "HARD").upper()), Default(fields.get("default", "ALL").upper())


def parse_table_lines(lines: Iterable[str], mode: Mode = Mode.HARD,
                      default: Default = Default.ALL) -> dict[int, CompositionTable]:
    """Parse ``<level> <label_i> <label_j> <RELATION> <weight>`` lines.

    A ``mode=... default=...`` line anywhere before the entries sets the
    table options; ``#`` starts a comment.
    """
    per_level: dict[int, dict] = {}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("mode=") or line.startswith("default="):
            mode, default = parse_header(line)
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"malformed table line: {raw!r}")
        level, li, lj, rel, w = parts
        entry = per_level.setdefault(int(level), {}).setdefault((li, lj), {})
        entry[Relation(rel.upper())] = float(w)
    return {h: CompositionTable(e, mode, default) for h, e in sorted(per_level.items())}


def format_tables(tables: Mapping[int, CompositionTable]) -> str:
    modes = {(t.mode, t.default) for t in tables.values()}
    if len(modes) > 1:
        raise ValueError("a single file carries one mode/default header")
    mode, default = modes.pop() if modes else (Mode.HARD, Default.ALL)
    lines = [f"mode={mode.value} default={default.value}"]
    for h, table in sorted(tables.items()):
        for (li, lj), rels in table.entries.items():
            for rel, w in rels.items():
                lines.append(f"{h} {li} {lj} {rel.value} {w!r}")
    return "\n".join(lines) + "\n"


def load_tables(path) -> dict[int, CompositionTable]:
    return parse_table_lines(Path(path).read_text(encoding="utf-8").splitlines())


def save_tables(tables: Mapping[int, CompositionTable], path) -> None:
    Path(path).write_text(format_tables(tables), encoding="utf-8")
