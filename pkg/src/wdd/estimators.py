"""scikit-learn style wrappers around the minimizers.

``ListReducer`` treats the input as a sequence of weighted items and learns
which of them to keep; ``transform`` then applies that selection to any
sequence of the same length. ``TreeReducer`` does the same for text reduced
through its syntax tree.
"""

from __future__ import annotations

import random
import time
from typing import Any, Callable

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .algorithms import minimize
from .core import CachedOracle, OracleCache, WeightedList
from .metrics import ReductionReport
from .tree import FORMATS, build_tree, fixpoint_reduce, hdd_reduce, render
from .validation import check_algorithm, check_elements, check_oracle, check_p0

__all__ = ["ListReducer", "TreeReducer"]


def _tie_breaker(random_state) -> random.Random | None:
    if random_state is None:
        return None
    if isinstance(random_state, random.Random):
        return random_state
    return random.Random(int(random_state))


class ListReducer(TransformerMixin, BaseEstimator):
    """Find a 1-minimal sub-sequence that keeps ``oracle`` true.

    ``oracle`` is called with a candidate :class:`~wdd.core.WeightedList`;
    each element's ``payload`` is the corresponding item of ``X`` (``None``
    when ``X`` is a bare weight vector) and ``id`` its position in ``X``.

    Fitted attributes: ``support_`` (boolean mask), ``result_`` (kept
    elements), ``n_tests_``, ``n_cache_hits_``, ``elapsed_``, ``report_``.
    """

    def __init__(self, oracle: Callable[[WeightedList], bool] | None = None, algorithm: str = "wddmin",
                 p0: float = 0.2, use_cache: bool = True, random_state: Any = None) -> None:
        self.oracle = oracle
        self.algorithm = algorithm
        self.p0 = p0
        self.use_cache = use_cache
        self.random_state = random_state

    def fit(self, X, y=None, weights=None) -> "ListReducer":
        """``X`` is either the weight vector itself or the items, with ``weights`` alongside."""
        oracle = check_oracle(self.oracle)
        algorithm = check_algorithm(self.algorithm)
        p0 = check_p0(self.p0)
        elements = check_elements(X, weights)
        if not oracle(elements):
            raise ValueError("oracle rejects the full input; nothing to reduce")
        counted = CachedOracle(oracle, use_cache=self.use_cache)
        start = time.monotonic()
        result = minimize(elements, counted, algorithm, p0=p0, rng=_tie_breaker(self.random_state))
        self.elapsed_ = time.monotonic() - start
        kept = set(result.ids)
        self.support_ = np.array([e.id in kept for e in elements], dtype=bool)
        self.result_ = result
        self.n_features_in_ = len(elements)
        self.n_tests_ = counted.tests
        self.n_cache_hits_ = counted.hits
        self.report_ = ReductionReport(
            initial_tokens=elements.total_weight(),
            final_tokens=result.total_weight(),
            elapsed=self.elapsed_,
            tests=counted.tests,
            cache_hits=counted.hits,
            algorithm=algorithm,
            granularity="list",
        )
        return self

    def get_support(self, indices: bool = False):
        check_is_fitted(self, "support_")
        return np.flatnonzero(self.support_) if indices else self.support_.copy()

    def transform(self, X) -> list:
        """Keep the items of ``X`` at the selected positions."""
        check_is_fitted(self, "support_")
        items = list(X)
        if len(items) != len(self.support_):
            raise ValueError(f"X has {len(items)} items, the reducer was fitted on {len(self.support_)}")
        return [x for x, keep in zip(items, self.support_) if keep]


class TreeReducer(BaseEstimator):
    """Reduce text level by level through its syntax tree.

    ``oracle`` receives rendered candidate bytes. ``fit`` stores the reduced
    document in ``result_`` (bytes) and the final tree in ``tree_``.
    """

    def __init__(self, oracle: Callable[[bytes], bool] | None = None, algorithm: str = "wddmin",
                 format: str = "delimiters", fixpoint: bool = True, p0: float = 0.2,
                 use_cache: bool = True, random_state: Any = None) -> None:
        self.oracle = oracle
        self.algorithm = algorithm
        self.format = format
        self.fixpoint = fixpoint
        self.p0 = p0
        self.use_cache = use_cache
        self.random_state = random_state

    def fit(self, X: str | bytes, y=None) -> "TreeReducer":
        oracle = check_oracle(self.oracle)
        algorithm = check_algorithm(self.algorithm)
        p0 = check_p0(self.p0)
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}; choose from {', '.join(FORMATS)}")
        tree = build_tree(X, self.format)
        cache = OracleCache() if self.use_cache else None
        tests = 0

        def counted(candidate: bytes) -> bool:
            nonlocal tests
            tests += 1
            return oracle(candidate)

        if not oracle(render(tree)):
            raise ValueError("oracle rejects the full input; nothing to reduce")
        start = time.monotonic()
        kwargs = dict(cache=cache, p0=p0, rng=_tie_breaker(self.random_state))
        if self.fixpoint:
            reduced = fixpoint_reduce(tree, algorithm, counted, **kwargs)
        else:
            reduced = hdd_reduce(tree, algorithm, counted, **kwargs)
        self.elapsed_ = time.monotonic() - start
        self.tree_ = reduced
        self.result_ = render(reduced)
        self.n_tests_ = tests
        self.report_ = ReductionReport(
            initial_tokens=tree.live_tokens(),
            final_tokens=reduced.live_tokens(),
            elapsed=self.elapsed_,
            tests=tests,
            cache_hits=cache.hits if cache is not None else 0,
            algorithm=algorithm,
            granularity=self.format,
        )
        return self

    def fit_transform(self, X: str | bytes, y=None) -> bytes:
        return self.fit(X).result_
