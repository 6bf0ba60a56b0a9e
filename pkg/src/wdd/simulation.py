"""Synthetic comparison of property-test counts on random weighted lists.

Each synthetic list has a predetermined minimization result: under the
assumption that every token is removable with the same probability ``p0``,
an element of weight ``w`` is removable with probability ``p0 ** w``. The
property holds for a candidate iff it still contains every non-removable
element.
"""

from __future__ import annotations

import csv
import gc
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import CachedOracle, WeightedList
from .ddmin import ddmin, wddmin
from .probdd import probdd, wprobdd

__all__ = [
    "SimInstance",
    "SimRecord",
    "SimReport",
    "ALGORITHMS",
    "EXTENSION_ALGORITHMS",
    "instance_rng",
    "synthesize_instance",
    "sim_oracle",
    "run_instance",
    "run_simulation",
]

ALGORITHMS = {"ddmin": ddmin, "wddmin": wddmin, "probdd": probdd, "wprobdd": wprobdd}
# not part of the original ddmin-vs-W_ddmin comparison
EXTENSION_ALGORITHMS = frozenset({"probdd", "wprobdd"})

CSV_COLUMNS = ["instance", "n", "total_tokens", "p0", "algorithm", "tests", "result_size_tokens"]


@dataclass(frozen=True)
class SimInstance:
    index: int
    seed: int
    weights: tuple[int, ...]
    p0: float
    removable: tuple[bool, ...]

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total_tokens(self) -> int:
        return sum(self.weights)

    @property
    def required(self) -> frozenset[int]:
        return frozenset(i for i, r in enumerate(self.removable) if not r)

    def as_list(self) -> WeightedList:
        return WeightedList.from_weights(self.weights)


def instance_rng(seed: int, index: int) -> np.random.Generator:
    """Independent PCG64 stream for instance ``index``.

    Instance ``k`` is the same no matter how many instances are drawn.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def synthesize_instance(rng: np.random.Generator, *, index: int = 0, seed: int = 0,
                        n: int | None = None, total_tokens: int | None = None,
                        p0: float | None = None) -> SimInstance:
    """Draw one random list and its predetermined result.

    ``n`` is uniform on [2, 1000] and the token total uniform on [n, 10n].
    Every element starts with one token and the remaining tokens go one by
    one to uniformly chosen elements. ``p0`` is uniform on (0, 1) and shared
    by all tokens of the list. The keyword overrides pin individual draws.
    """
    if n is None:
        n = int(rng.integers(2, 1001))
    if total_tokens is None:
        total_tokens = int(rng.integers(n, 10 * n + 1))
    if total_tokens < n:
        raise ValueError("need at least one token per element")
    extra = rng.integers(0, n, size=total_tokens - n)
    weights = np.bincount(extra, minlength=n) + 1
    if p0 is None:
        p0 = 0.0
        while p0 == 0.0:
            p0 = float(rng.random())
    p_remove = p0 ** weights.astype(float)
    removable = rng.random(n) < p_remove
    return SimInstance(index, seed, tuple(int(w) for w in weights), float(p0),
                       tuple(bool(r) for r in removable))


def sim_oracle(instance: SimInstance, candidate: Iterable[int]) -> bool:
    """The property holds iff no non-removable element is missing."""
    return instance.required.issubset(candidate)


@dataclass(frozen=True)
class SimRecord:
    instance: int
    n: int
    total_tokens: int
    p0: float
    algorithm: str
    tests: int
    result_size_tokens: int
    correct: bool


@dataclass
class SimReport:
    records: list[SimRecord] = field(default_factory=list)
    algorithms: tuple[str, ...] = ()

    def tests(self, algorithm: str) -> list[int]:
        return [r.tests for r in self.records if r.algorithm == algorithm]

    def mean_tests(self, algorithm: str) -> float:
        counts = self.tests(algorithm)
        return sum(counts) / len(counts) if counts else float("nan")

    def savings(self, algorithm: str = "wddmin", baseline: str = "ddmin") -> float:
        """Fraction of property tests saved: ``1 - mean(algorithm) / mean(baseline)``."""
        return 1.0 - self.mean_tests(algorithm) / self.mean_tests(baseline)

    def mismatches(self) -> int:
        return sum(not r.correct for r in self.records)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.records:
            writer.writerow([r.instance, r.n, r.total_tokens, repr(r.p0), r.algorithm, r.tests,
                             r.result_size_tokens])
        return buf.getvalue()

    def summary(self) -> str:
        lines = []
        for alg in self.algorithms:
            tag = " (extension)" if alg in EXTENSION_ALGORITHMS else ""
            lines.append(f"{alg}{tag}: mean tests {self.mean_tests(alg):.2f}")
        pairs = [("wddmin", "ddmin"), ("wprobdd", "probdd")]
        for alg, base in pairs:
            if alg in self.algorithms and base in self.algorithms:
                lines.append(f"{alg} uses {100 * self.savings(alg, base):.1f}% fewer property tests than {base}")
        lines.append(f"result mismatches: {self.mismatches()}")
        return "\n".join(lines)


def _kernels():
    try:
        from . import _kernels
    except ImportError:  # numba missing
        return None
    return _kernels.KERNELS


def run_instance(instance: SimInstance, algorithm: str, engine: str = "auto") -> SimRecord:
    """Run one algorithm on one instance.

    ``engine="compiled"`` uses the numba kernels (ddmin and wddmin only),
    ``"python"`` the reference implementations, and ``"auto"`` the kernels
    whenever they apply and numba is importable.
    """
    if engine not in ("auto", "compiled", "python"):
        raise ValueError(f"unknown engine {engine!r}")
    kernels = _kernels() if engine != "python" else None
    if engine == "compiled" and (kernels is None or algorithm not in kernels):
        raise ValueError(f"no compiled kernel for {algorithm!r}")
    if kernels is not None and algorithm in kernels:
        required = [not r for r in instance.removable]
        tests, kept = kernels[algorithm](instance.weights, required)
        kept = [int(i) for i in kept]
        return SimRecord(
            instance=instance.index,
            n=instance.n,
            total_tokens=instance.total_tokens,
            p0=instance.p0,
            algorithm=algorithm,
            tests=int(tests),
            result_size_tokens=sum(instance.weights[i] for i in kept),
            correct=set(kept) == instance.required,
        )

    elements = instance.as_list()
    required = frozenset(e for e in elements if not instance.removable[e.id])
    oracle = CachedOracle(required.issubset)
    # the cache keeps every candidate alive; cyclic GC passes over it are pure overhead
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        result = ALGORITHMS[algorithm](elements, oracle)
    finally:
        oracle.cache = None
        if gc_was_enabled:
            gc.enable()
    return SimRecord(
        instance=instance.index,
        n=instance.n,
        total_tokens=instance.total_tokens,
        p0=instance.p0,
        algorithm=algorithm,
        tests=oracle.tests,
        result_size_tokens=result.total_weight(),
        correct=set(result) == required,
    )


def run_simulation(count: int, seed: int = 0,
                   algorithms: Sequence[str] = ("ddmin", "wddmin"),
                   progress=None, engine: str = "auto") -> SimReport:
    """Synthesize ``count`` lists and run every algorithm on each.

    Test counts exclude cache hits. The report depends only on
    ``(count, seed, algorithms)``.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise ValueError(f"unknown algorithms: {', '.join(unknown)}")
    report = SimReport(algorithms=tuple(algorithms))
    for k in range(count):
        instance = synthesize_instance(instance_rng(seed, k), index=k, seed=seed)
        for alg in algorithms:
            report.records.append(run_instance(instance, alg, engine))
        if progress is not None:
            progress(k + 1)
    return report
