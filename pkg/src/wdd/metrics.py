"""Reduction reports, per-weight deletion rates and rank correlation."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.stats import rankdata

from .core import Element

__all__ = [
    "ReductionReport",
    "WeightClass",
    "WeightDeletionStats",
    "deletion_probability_by_weight",
    "spearman_rho",
    "InvocationCorrelation",
    "CorrelationReport",
    "correlation_analysis",
    "read_session_log",
]


@dataclass(frozen=True)
class ReductionReport:
    initial_tokens: int
    final_tokens: int
    elapsed: float
    tests: int
    cache_hits: int = 0
    algorithm: str = ""
    granularity: str = ""

    def __post_init__(self) -> None:
        if not 0 <= self.final_tokens <= self.initial_tokens:
            raise ValueError(f"final size {self.final_tokens} outside [0, {self.initial_tokens}]")
        if self.elapsed < 0 or self.tests < 0 or self.cache_hits < 0:
            raise ValueError("elapsed time and counters must be non-negative")

    @property
    def removed_tokens(self) -> int:
        return self.initial_tokens - self.final_tokens

    @property
    def speed(self) -> float:
        """Tokens removed per second."""
        if self.elapsed == 0:
            return 0.0 if self.removed_tokens == 0 else math.inf
        return self.removed_tokens / self.elapsed

    def to_text(self) -> str:
        rows = [
            ("algorithm", self.algorithm),
            ("granularity", self.granularity),
            ("initial tokens", str(self.initial_tokens)),
            ("final tokens S(#)", str(self.final_tokens)),
            ("time T(s)", repr(self.elapsed)),
            ("oracle tests", str(self.tests)),
            ("cache hits", str(self.cache_hits)),
            ("speed (tokens/s)", f"{self.speed:.2f}"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ReductionReport":
        values = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, value = line.partition("  ")
            values[key.strip()] = value.strip()
        return cls(
            initial_tokens=int(values["initial tokens"]),
            final_tokens=int(values["final tokens S(#)"]),
            elapsed=float(values["time T(s)"]),
            tests=int(values["oracle tests"]),
            cache_hits=int(values["cache hits"]),
            algorithm=values.get("algorithm", ""),
            granularity=values.get("granularity", ""),
        )

    CSV_COLUMNS = ("algorithm", "granularity", "initial_tokens", "final_tokens",
                   "elapsed", "tests", "cache_hits", "speed")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_COLUMNS)
        row = asdict(self)
        row["elapsed"] = repr(self.elapsed)
        row["speed"] = f"{self.speed:.6g}"
        writer.writerow([row[c] for c in self.CSV_COLUMNS])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ReductionReport":
        rows = list(csv.DictReader(io.StringIO(text)))
        if len(rows) != 1:
            raise ValueError(f"expected exactly one report row, found {len(rows)}")
        row = rows[0]
        kwargs = {}
        for f in fields(cls):
            raw = row[f.name]
            kwargs[f.name] = raw if f.type == "str" else (float(raw) if f.name == "elapsed" else int(raw))
        return cls(**kwargs)


class WeightClass(NamedTuple):
    weight: int
    before: int
    after: int
    p_del: float


@dataclass(frozen=True)
class WeightDeletionStats:
    classes: tuple[WeightClass, ...]

    def as_dict(self) -> dict[int, float]:
        return {c.weight: c.p_del for c in self.classes}

    @property
    def deleted(self) -> int:
        return sum(c.before - c.after for c in self.classes)


def deletion_probability_by_weight(before: Sequence[Element], after: Sequence[Element]) -> WeightDeletionStats:
    """Fraction of elements of each weight that did not survive, sorted by weight."""
    kept = {e.id for e in after}
    if not kept <= {e.id for e in before}:
        raise ValueError("after contains elements that are not in before")
    total = Counter(e.weight for e in before)
    surviving = Counter(e.weight for e in before if e.id in kept)
    return WeightDeletionStats(tuple(
        WeightClass(w, total[w], surviving[w], (total[w] - surviving[w]) / total[w])
        for w in sorted(total)
    ))


def spearman_rho(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Spearman's rank correlation with average ranks for ties.

    Returns None when either variable is constant, since the coefficient is
    undefined there.
    """
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ValueError("need at least two observations")
    rx = rankdata(xs)
    ry = rankdata(ys)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denom = math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    if denom == 0:
        return None
    return max(-1.0, min(1.0, float(np.dot(dx, dy)) / denom))


class InvocationCorrelation(NamedTuple):
    index: int
    depth: int | None
    stats: WeightDeletionStats
    rho: float | None


@dataclass(frozen=True)
class CorrelationReport:
    invocations: tuple[InvocationCorrelation, ...]

    @property
    def mean_rho(self) -> float | None:
        values = [inv.rho for inv in self.invocations if inv.rho is not None]
        return sum(values) / len(values) if values else None

    def to_text(self) -> str:
        lines = ["invocation depth classes rho"]
        for inv in self.invocations:
            rho = "undefined" if inv.rho is None else f"{inv.rho:.4f}"
            lines.append(f"{inv.index} {inv.depth if inv.depth is not None else '-'} {len(inv.stats.classes)} {rho}")
        mean = self.mean_rho
        lines.append(f"mean rho: {'undefined' if mean is None else f'{mean:.4f}'}")
        return "\n".join(lines) + "\n"


def correlation_analysis(records: Iterable[Mapping]) -> CorrelationReport:
    """Weight/deletion-rate correlation for every logged algorithm invocation.

    Only ``invocation`` records are used; each must carry ``weights`` (the
    input list) and ``kept`` (positions of the survivors). Invocations that
    deleted nothing are left out.
    """
    out = []
    for index, rec in enumerate(r for r in records if r.get("event") == "invocation"):
        before = [Element(i, int(w)) for i, w in enumerate(rec["weights"])]
        kept = set(rec["kept"])
        stats = deletion_probability_by_weight(before, [e for e in before if e.id in kept])
        if stats.deleted == 0:
            continue
        rho = None
        if len(stats.classes) >= 2:
            rho = spearman_rho([c.weight for c in stats.classes], [c.p_del for c in stats.classes])
        out.append(InvocationCorrelation(index, rec.get("depth"), stats, rho))
    return CorrelationReport(tuple(out))


def read_session_log(path) -> list[dict]:
    """Load a JSON-lines session log, skipping blank lines."""
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
