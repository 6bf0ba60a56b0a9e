"""Compiled ddmin / W_ddmin for the synthetic simulation.

These mirror :func:`wdd.ddmin.ddmin` and :func:`wdd.ddmin.wddmin` step for
step, specialised to the simulation's monotone oracle (a candidate passes iff
it holds every required element). Candidates are arrays of original
positions; the duplicate-test cache is keyed by two independent 64-bit
additive hashes of the position set, which is exact for practical purposes
because every candidate is an ordered subsequence of the input.

The pure-Python implementations remain the reference; the test suite checks
that both produce identical test counts and results.
"""

from __future__ import annotations

import numpy as np
from numba import njit, types
from numba.typed import Dict, List

_KEY = types.UniTuple(types.uint64, 2)
_MAX_N = 1 << 16
_rng = np.random.Generator(np.random.PCG64(0x5EED))
_H1 = _rng.integers(0, np.iinfo(np.uint64).max, size=_MAX_N, dtype=np.uint64, endpoint=True)
_H2 = _rng.integers(0, np.iinfo(np.uint64).max, size=_MAX_N, dtype=np.uint64, endpoint=True)


@njit(cache=True)
def _query(cand, required, n_required, cache, counter, h1, h2):
    k1 = np.uint64(0)
    k2 = np.uint64(0)
    for i in cand:
        k1 += h1[i]
        k2 += h2[i]
    key = (k1, k2)
    if key in cache:
        return cache[key]
    counter[0] += 1
    found = 0
    for i in cand:
        if required[i]:
            found += 1
    verdict = found == n_required
    cache[key] = verdict
    return verdict


@njit(cache=True)
def _ddmin(n_elements, required, h1, h2):
    cache = Dict.empty(key_type=_KEY, value_type=types.boolean)
    counter = np.zeros(1, dtype=np.int64)
    n_required = 0
    for r in required:
        if r:
            n_required += 1
    current = np.arange(n_elements)
    n = min(2, n_elements)
    while current.size > 0:
        m = current.size
        reduced = False
        if n > 1:
            start = 0
            for i in range(n):
                stop = start + (m - start) // (n - i)
                cand = current[start:stop]
                if _query(cand, required, n_required, cache, counter, h1, h2):
                    current = cand.copy()
                    n = min(2, current.size)
                    reduced = True
                    break
                start = stop
        if reduced:
            continue
        start = 0
        for i in range(n):
            stop = start + (m - start) // (n - i)
            cand = np.concatenate((current[:start], current[stop:]))
            if _query(cand, required, n_required, cache, counter, h1, h2):
                current = cand
                n = min(max(n - 1, 2), current.size)
                reduced = True
                break
            start = stop
        if reduced:
            continue
        if n >= m:
            break
        n = min(2 * n, m)
    return counter[0], current


@njit(cache=True)
def _weight_partition(partitions, weights):
    out = List()
    for ptn in partitions:
        if ptn.size == 1:
            continue
        total = 0
        for i in ptn:
            total += weights[i]
        half = 0.5 * total
        best_cut = 1
        best_gap = -1.0
        running = 0
        for cut in range(1, ptn.size):
            running += weights[ptn[cut - 1]]
            gap = abs(running - half)
            if best_gap < 0 or gap < best_gap:
                best_cut = cut
                best_gap = gap
        out.append(ptn[:best_cut].copy())
        out.append(ptn[best_cut:].copy())
    return out


@njit(cache=True)
def _wddmin(n_elements, weights, required, h1, h2):
    cache = Dict.empty(key_type=_KEY, value_type=types.boolean)
    counter = np.zeros(1, dtype=np.int64)
    n_required = 0
    for r in required:
        if r:
            n_required += 1
    l_min = np.arange(n_elements)
    partitions = List()
    partitions.append(l_min.copy())
    while len(partitions) > 0:
        reduced = False
        for ptn in partitions:
            if ptn.size == l_min.size or _query(ptn, required, n_required, cache, counter, h1, h2):
                l_min = ptn.copy()
                single = List()
                single.append(l_min.copy())
                partitions = _weight_partition(single, weights)
                reduced = True
                break
        if reduced:
            continue
        for j in range(len(partitions)):
            ptn = partitions[j]
            start = np.searchsorted(l_min, ptn[0])
            cand = np.concatenate((l_min[:start], l_min[start + ptn.size:]))
            if _query(cand, required, n_required, cache, counter, h1, h2):
                l_min = cand
                rest = List()
                for q in range(len(partitions)):
                    if q != j:
                        rest.append(partitions[q])
                partitions = rest
                reduced = True
                break
        if reduced:
            continue
        partitions = _weight_partition(partitions, weights)

    restart = True
    while restart:
        restart = False
        for i in range(l_min.size):
            cand = np.concatenate((l_min[:i], l_min[i + 1:]))
            if _query(cand, required, n_required, cache, counter, h1, h2):
                l_min = cand
                restart = True
                break
    return counter[0], l_min


def run_ddmin(weights, required):
    """Return ``(tests, kept positions)`` for ddmin under the monotone oracle."""
    required = np.asarray(required, dtype=np.bool_)
    return _ddmin(len(required), required, _H1, _H2)


def run_wddmin(weights, required):
    """Return ``(tests, kept positions)`` for W_ddmin under the monotone oracle."""
    weights = np.asarray(weights, dtype=np.int64)
    required = np.asarray(required, dtype=np.bool_)
    return _wddmin(len(required), weights, required, _H1, _H2)


KERNELS = {"ddmin": run_ddmin, "wddmin": run_wddmin}
