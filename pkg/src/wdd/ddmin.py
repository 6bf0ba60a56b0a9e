"""Classic ddmin and weighted ddmin (W_ddmin)."""

from __future__ import annotations

import logging
from typing import Callable, Sequence

from .core import Element, WeightedList

__all__ = [
    "split_evenly",
    "split_by_half_weight",
    "weight_partition",
    "ddmin",
    "wddmin",
    "check_one_minimal",
]

log = logging.getLogger(__name__)

Oracle = Callable[[WeightedList], bool]


def split_evenly(elements: WeightedList, n: int) -> list[WeightedList]:
    """Split into ``n`` contiguous chunks whose lengths differ by at most one."""
    elements = WeightedList(elements)
    if not 1 <= n <= max(len(elements), 1):
        raise ValueError(f"cannot split {len(elements)} elements into {n} partitions")
    parts = []
    start = 0
    for i in range(n):
        stop = start + (len(elements) - start) // (n - i)
        parts.append(elements[start:stop])
        start = stop
    return parts


def split_by_half_weight(partition: Sequence[Element]) -> tuple[WeightedList, WeightedList]:
    """Cut ``partition`` into a non-empty prefix and suffix of near-equal weight.

    The cut minimises ``|weight(prefix) - total/2|``; on a tie the shorter
    prefix wins.
    """
    partition = WeightedList(partition)
    if len(partition) < 2:
        raise ValueError("need at least two elements to split")
    half = 0.5 * partition.total_weight()
    best_cut, best_gap = 1, None
    running = 0
    for cut in range(1, len(partition)):
        running += partition[cut - 1].weight
        gap = abs(running - half)
        if best_gap is None or gap < best_gap:
            best_cut, best_gap = cut, gap
    return partition[:best_cut], partition[best_cut:]


def weight_partition(partitions: Sequence[Sequence[Element]]) -> list[WeightedList]:
    """Halve every partition by weight; single-element partitions are dropped."""
    result: list[WeightedList] = []
    for ptn in partitions:
        if len(ptn) <= 1:
            continue
        result.extend(split_by_half_weight(ptn))
    return result


def ddmin(elements: Sequence[Element], oracle: Oracle) -> WeightedList:
    """Minimize ``elements`` with classic ddmin, splitting by element count.

    The caller guarantees ``oracle(elements)`` holds. The result is
    1-minimal: removing any single element breaks the property.
    """
    current = WeightedList(elements)
    n = min(2, len(current))
    while current:
        parts = split_evenly(current, n)

        reduced = False
        if n > 1:
            for ptn in parts:
                if oracle(ptn):
                    current, n, reduced = ptn, min(2, len(ptn)), True
                    break
        if reduced:
            continue

        start = 0
        for ptn in parts:
            stop = start + len(ptn)
            complement = current[:start] + current[stop:]
            if oracle(complement):
                current = complement
                n = min(max(n - 1, 2), len(current))
                reduced = True
                break
            start = stop
        if reduced:
            continue

        if n >= len(current):
            break
        n = min(2 * n, len(current))
    return current


def wddmin(elements: Sequence[Element], oracle: Oracle) -> WeightedList:
    """Minimize ``elements`` with weighted ddmin.

    Partitions are halved by weight instead of length, partitions that shrink
    to a single element leave the working set, and a final one-by-one
    deletion pass restores 1-minimality.
    """
    l_min = WeightedList(elements)
    partitions = [l_min]
    while partitions:
        reduced = False
        for ptn in partitions:
            # ptn == l_min is known to hold, no need to ask
            if len(ptn) == len(l_min) or oracle(ptn):
                l_min = ptn
                partitions = weight_partition([ptn])
                reduced = True
                break
        if reduced:
            continue

        position = {e: i for i, e in enumerate(l_min)}
        for i, ptn in enumerate(partitions):
            complement = _cut(l_min, ptn, position)
            if oracle(complement):
                l_min = complement
                partitions = partitions[:i] + partitions[i + 1:]
                reduced = True
                break
        if reduced:
            continue

        partitions = weight_partition(partitions)
    return check_one_minimal(l_min, oracle)


def _cut(l_min: WeightedList, ptn: WeightedList, position: dict[Element, int]) -> WeightedList:
    # partitions stay contiguous runs of l_min, so the complement is two slices
    start = position[ptn[0]]
    stop = start + len(ptn)
    if l_min[stop - 1] is ptn[-1]:
        return l_min[:start] + l_min[stop:]
    return l_min.without(ptn)


def check_one_minimal(elements: Sequence[Element], oracle: Oracle) -> WeightedList:
    """Try deleting each element alone, rescanning from the start after every success."""
    l_min = WeightedList(elements)
    restart = True
    while restart:
        restart = False
        for i in range(len(l_min)):
            complement = l_min[:i] + l_min[i + 1:]
            if oracle(complement):
                log.debug("one-minimal pass removed element %d", l_min[i].id)
                l_min = complement
                restart = True
                break
    return l_min
