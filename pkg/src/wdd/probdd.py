"""Probabilistic delta debugging (ProbDD) and its weighted variant (W_ProbDD).

Both keep, for every live element, an estimate of the probability that the
element belongs to the minimized result. After a failed deletion attempt the
probabilities of the attempted elements are raised with the Bayesian update

    p'(e) = p(e) / (1 - prod_{j in pre} (1 - p(j)))

taken from the original ProbDD model. A failed single-element attempt
therefore pins that element at exactly 1.
"""

from __future__ import annotations

import math
import random
from typing import Callable, Mapping, NamedTuple, Sequence

from .core import Element, WeightedList

__all__ = [
    "EPSILON",
    "DEFAULT_P0",
    "GainEvaluation",
    "prefix_gains",
    "select_probdd_prefix",
    "get_nodes_to_remove",
    "update_probabilities",
    "should_terminate",
    "probdd",
    "wprobdd",
]

EPSILON = 1e-12
DEFAULT_P0 = 0.2

Oracle = Callable[[WeightedList], bool]
ProbState = dict[int, float]


class GainEvaluation(NamedTuple):
    size: int
    weight: float
    prob_of_deletion: float
    gain: float


def _settled(p: float) -> bool:
    return p >= 1.0 - EPSILON


def _check_p0(p0: float) -> None:
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"p0 must lie strictly between 0 and 1, got {p0!r}")


def _order(elements: Sequence[Element], key, rng: random.Random | None) -> list[Element]:
    items = list(elements)
    if rng is not None:
        # random tie-breaking: shuffle, then a stable sort keeps the shuffle among equal keys
        rng.shuffle(items)
    return sorted(items, key=key)


def prefix_gains(ordered: Sequence[Element], probs: Mapping[int, float]) -> list[GainEvaluation]:
    """Weighted gain of every prefix of ``ordered`` (one pass)."""
    out = []
    weight = 0.0
    q = 1.0
    for m, e in enumerate(ordered, 1):
        weight += e.weight
        q *= 1.0 - probs[e.id]
        out.append(GainEvaluation(m, weight, q, weight * q))
    return out


def select_probdd_prefix(
    elements: Sequence[Element], probs: Mapping[int, float], rng: random.Random | None = None
) -> WeightedList:
    """ProbDD's choice: the prefix (by ascending probability) maximising ``|pre| * prod(1 - p)``.

    Ties go to the longer prefix.
    """
    ordered = _order(elements, lambda e: probs[e.id], rng)
    best_m, best_gain = 0, 0.0
    q = 1.0
    for m, e in enumerate(ordered, 1):
        q *= 1.0 - probs[e.id]
        gain = m * q
        if gain <= 0.0:
            break
        if gain > best_gain or math.isclose(gain, best_gain, rel_tol=1e-12):
            best_m, best_gain = m, gain
    return WeightedList(ordered[:best_m])


def get_nodes_to_remove(
    elements: Sequence[Element], probs: Mapping[int, float], rng: random.Random | None = None
) -> WeightedList:
    """W_ProbDD's choice of elements to delete next.

    Elements are ranked by ``weight * (1 - p)`` (descending, stable) and the
    prefix with the largest ``sum(weight) * prod(1 - p)`` is returned; the
    comparison is strict, so the shortest maximising prefix wins. Gains within
    rounding of each other count as equal, which keeps the choice unchanged
    when all weights are scaled by a constant. An empty result means no prefix
    has positive gain.
    """
    ordered = _order(elements, lambda e: -(e.weight * (1.0 - probs[e.id])), rng)
    best_m, gain_max = 0, 0.0
    weight = 0.0
    q = 1.0
    for m, e in enumerate(ordered, 1):
        weight += e.weight
        q *= 1.0 - probs[e.id]
        gain = weight * q
        if gain > gain_max and not math.isclose(gain, gain_max, rel_tol=1e-12):
            best_m, gain_max = m, gain
    return WeightedList(ordered[:best_m])


def update_probabilities(pre: Sequence[Element], probs: Mapping[int, float]) -> ProbState:
    """Raise the probabilities of ``pre`` after its deletion failed."""
    out = dict(probs)
    if not pre:
        return out
    if len(pre) == 1:
        out[pre[0].id] = 1.0
        return out
    q = 1.0
    for e in pre:
        q *= 1.0 - probs[e.id]
    denom = 1.0 - q
    if denom <= 0.0:
        raise ValueError("cannot update: every member of pre has probability 0")
    for e in pre:
        p = min(probs[e.id] / denom, 1.0)
        out[e.id] = 1.0 if _settled(p) else p
    return out


def should_terminate(probs: Mapping[int, float], weights: Mapping[int, int] | None = None) -> bool:
    """True once every live probability is 1 (within EPSILON).

    With ``weights`` given, also true when no unsettled element carries any
    weight, since then no prefix has positive weighted gain.
    """
    unsettled = [k for k, p in probs.items() if not _settled(p)]
    if not unsettled:
        return True
    if weights is not None:
        return all(weights[k] <= 0 for k in unsettled)
    return False


def _run(
    elements: Sequence[Element],
    oracle: Oracle,
    p0: float,
    select,
    weighted: bool,
    initial_probs: Mapping[int, float] | None,
    rng: random.Random | None,
    history: list | None,
) -> WeightedList:
    _check_p0(p0)
    live = WeightedList(elements)
    probs: ProbState = {e.id: p0 for e in live}
    if initial_probs is not None:
        probs.update({k: float(v) for k, v in initial_probs.items() if k in probs})
    weights = {e.id: e.weight for e in live} if weighted else None

    while not should_terminate(probs, weights):
        pre = select(live, probs, rng)
        if not pre:
            break
        complement = live.without(pre)
        if oracle(complement):
            live = complement
            for e in pre:
                del probs[e.id]
        else:
            probs = update_probabilities(pre, probs)
        if history is not None:
            history.append(dict(probs))
    return live


def probdd(
    elements: Sequence[Element],
    oracle: Oracle,
    p0: float = DEFAULT_P0,
    *,
    initial_probs: Mapping[int, float] | None = None,
    rng: random.Random | None = None,
    history: list | None = None,
) -> WeightedList:
    """Minimize ``elements`` with ProbDD (weights are ignored).

    ``rng`` enables random tie-breaking between equal probabilities; by
    default ties keep the original order. ``history``, if given, receives a
    copy of the probability map after every test.
    """
    return _run(elements, oracle, p0, select_probdd_prefix, False, initial_probs, rng, history)


def wprobdd(
    elements: Sequence[Element],
    oracle: Oracle,
    p0: float = DEFAULT_P0,
    *,
    initial_probs: Mapping[int, float] | None = None,
    rng: random.Random | None = None,
    history: list | None = None,
) -> WeightedList:
    """Minimize ``elements`` with W_ProbDD, maximising the expected removed weight."""
    return _run(elements, oracle, p0, get_nodes_to_remove, True, initial_probs, rng, history)
