"""Argument checks shared by the estimators and the command line."""

from __future__ import annotations

import numbers
from typing import Any, Callable, Sequence

import numpy as np

from .algorithms import ALGORITHM_NAMES
from .core import Element, WeightedList

__all__ = ["check_algorithm", "check_p0", "check_weights", "check_elements", "check_oracle"]


def check_algorithm(name: str) -> str:
    if name not in ALGORITHM_NAMES:
        raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHM_NAMES)}")
    return name


def check_p0(p0: Any) -> float:
    if isinstance(p0, bool) or not isinstance(p0, numbers.Real):
        raise TypeError(f"p0 must be a real number, got {type(p0).__name__}")
    p0 = float(p0)
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"p0 must lie strictly between 0 and 1, got {p0}")
    return p0


def check_weights(weights: Any) -> np.ndarray:
    """Return ``weights`` as a 1-D int64 array of non-negative integers."""
    arr = np.asarray(weights)
    if arr.ndim != 1:
        raise ValueError(f"weights must be one-dimensional, got shape {arr.shape}")
    if arr.size and not (np.issubdtype(arr.dtype, np.integer)
                         or (np.issubdtype(arr.dtype, np.floating) and np.all(np.mod(arr, 1) == 0))):
        raise ValueError("weights must be integers")
    arr = arr.astype(np.int64)
    if arr.size and arr.min() < 0:
        raise ValueError("weights must be non-negative")
    return arr


def check_elements(X: Any, weights: Any = None) -> WeightedList:
    """Coerce the accepted input shapes into a validated :class:`WeightedList`.

    * a sequence of :class:`Element` is used as is (``weights`` must be None);
    * with ``weights`` given, ``X`` holds payloads, one per weight;
    * otherwise ``X`` itself is the weight vector.
    """
    if isinstance(X, WeightedList):
        if weights is not None:
            raise ValueError("weights cannot be combined with Element input")
        return X.validate()
    items = list(X)
    if items and all(isinstance(e, Element) for e in items):
        if weights is not None:
            raise ValueError("weights cannot be combined with Element input")
        return WeightedList(items).validate()
    if weights is None:
        return WeightedList.from_weights(check_weights(items).tolist())
    w = check_weights(weights)
    if len(w) != len(items):
        raise ValueError(f"got {len(items)} items but {len(w)} weights")
    return WeightedList.from_weights(w.tolist(), items)


def check_oracle(oracle: Any) -> Callable[[Sequence[Element]], bool]:
    if not callable(oracle):
        raise TypeError("oracle must be callable")
    return oracle
