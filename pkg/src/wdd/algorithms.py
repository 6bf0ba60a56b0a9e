"""Name-based access to the four list minimizers."""

from __future__ import annotations

import random
from typing import Callable, Sequence

from .core import Element, WeightedList
from .ddmin import ddmin, wddmin
from .probdd import DEFAULT_P0, probdd, wprobdd

ALGORITHM_NAMES = ("ddmin", "wddmin", "probdd", "wprobdd")


def minimize(
    elements: Sequence[Element],
    oracle: Callable[[WeightedList], bool],
    algorithm: str = "wddmin",
    *,
    p0: float = DEFAULT_P0,
    rng: random.Random | None = None,
) -> WeightedList:
    """Run the named minimizer. ``p0`` and ``rng`` only matter for the ProbDD family."""
    if algorithm == "ddmin":
        return ddmin(elements, oracle)
    if algorithm == "wddmin":
        return wddmin(elements, oracle)
    if algorithm == "probdd":
        return probdd(elements, oracle, p0, rng=rng)
    if algorithm == "wprobdd":
        return wprobdd(elements, oracle, p0, rng=rng)
    raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHM_NAMES)}")
