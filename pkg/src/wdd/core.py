"""Element/list data model, tokenization and the oracle verdict cache."""

from __future__ import annotations

import hashlib
import re
import threading
from array import array
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable, NamedTuple, Sequence

__all__ = [
    "Element",
    "WeightedList",
    "Token",
    "tokenize",
    "token_count",
    "total_weight",
    "OracleCache",
    "cached_verdict",
    "CachedOracle",
    "content_digest",
    "render_ids",
]


@dataclass(frozen=True, slots=True, eq=False)
class Element:
    """One removable fragment of the input.

    ``id`` is the 0-based position in the original list, ``weight`` the token
    count of the fragment and ``payload`` whatever the caller needs to turn the
    element back into text (a string, a byte span, a tree node handle...).

    Elements compare and hash by identity: each one stands for a single
    fragment of a single input. Compare ``ids`` to compare lists built
    separately.
    """

    id: int
    weight: int = 1
    payload: Any = None


_tuple_getitem = tuple.__getitem__
_tuple_add = tuple.__add__


class WeightedList(tuple):
    """Ordered, immutable sequence of :class:`Element`.

    Slicing and the set-like helpers return ``WeightedList`` again so that
    partitions and complements keep the same type as the list they came from.
    """

    __slots__ = ()

    @classmethod
    def from_weights(cls, weights: Iterable[int], payloads: Sequence[Any] | None = None) -> "WeightedList":
        weights = list(weights)
        if payloads is None:
            return cls(Element(i, int(w)) for i, w in enumerate(weights))
        if len(payloads) != len(weights):
            raise ValueError("payloads and weights differ in length")
        return cls(Element(i, int(w), p) for i, (w, p) in enumerate(zip(weights, payloads)))

    def __getitem__(self, key):
        if key.__class__ is slice:
            return WeightedList(_tuple_getitem(self, key))
        return _tuple_getitem(self, key)

    def __add__(self, other) -> "WeightedList":
        return WeightedList(_tuple_add(self, other))

    def __repr__(self) -> str:
        return f"WeightedList(ids={list(self.ids)}, weights={list(self.weights)})"

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self)

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(e.weight for e in self)

    @property
    def payloads(self) -> tuple[Any, ...]:
        return tuple(e.payload for e in self)

    def total_weight(self) -> int:
        return sum(e.weight for e in self)

    def without(self, removed: Iterable[Element]) -> "WeightedList":
        """Return the complement ``self \\ removed``, keeping order."""
        gone = {e.id for e in removed}
        return WeightedList(e for e in self if e.id not in gone)

    def only(self, ids: Iterable[int]) -> "WeightedList":
        keep = set(ids)
        return WeightedList(e for e in self if e.id in keep)

    def validate(self) -> "WeightedList":
        seen: set[int] = set()
        for e in self:
            if not isinstance(e, Element):
                raise TypeError(f"expected Element, got {type(e).__name__}")
            if e.id in seen:
                raise ValueError(f"duplicate element id {e.id}")
            if e.weight < 0:
                raise ValueError(f"element {e.id} has negative weight {e.weight}")
            seen.add(e.id)
        return self


def total_weight(elements: Iterable[Element]) -> int:
    """Sum of element weights; 0 for an empty list."""
    return sum(e.weight for e in elements)


# --------------------------------------------------------------------------
# tokenization

class Token(NamedTuple):
    start: int
    end: int
    text: Any


_PATTERNS = {
    "whitespace": r"[^ \t\r\n\f\v]+",
    "line": r"[^\n]*[^\s][^\n]*",
    # words, or single punctuation characters; a backslash-newline is a
    # line continuation and counts as whitespace
    "lexical": r"\w+|(?!\\\r?\n)[^\s\w]",
}
_COMPILED_STR = {k: re.compile(v) for k, v in _PATTERNS.items()}
_COMPILED_BYTES = {k: re.compile(v.encode()) for k, v in _PATTERNS.items()}


def tokenize(source: str | bytes, mode: str = "whitespace") -> list[Token]:
    """Split ``source`` into token spans.

    ``whitespace`` splits on maximal runs of blanks, ``line`` yields one token
    per line that holds any non-blank character (the newline itself is a
    delimiter) and ``lexical`` yields identifier/number runs plus single
    punctuation characters. The gaps between spans are exactly the
    delimiters, so the source can always be rebuilt from spans and gaps.
    """
    table = _COMPILED_BYTES if isinstance(source, (bytes, bytearray)) else _COMPILED_STR
    try:
        pattern = table[mode]
    except KeyError:
        raise ValueError(f"unknown tokenize mode {mode!r}") from None
    return [Token(m.start(), m.end(), m.group()) for m in pattern.finditer(source)]


def token_count(source: str | bytes, mode: str = "whitespace") -> int:
    """Number of tokens in ``source``; bytes are decoded as UTF-8 first so that
    non-ASCII letters count as word characters."""
    if isinstance(source, (bytes, bytearray)):
        source = bytes(source).decode("utf-8", errors="surrogateescape")
    try:
        pattern = _COMPILED_STR[mode]
    except KeyError:
        raise ValueError(f"unknown tokenize mode {mode!r}") from None
    return sum(1 for _ in pattern.finditer(source))


# --------------------------------------------------------------------------
# oracle cache

def content_digest(content: bytes) -> str:
    return hashlib.blake2b(content, digest_size=20).hexdigest()


def render_ids(candidate: Iterable[Element]) -> bytes:
    """Canonical bytes for a candidate that has no textual rendering."""
    return array("q", (e.id for e in candidate)).tobytes()


class OracleCache:
    """In-memory map from content digest to verdict.

    Safe to share between threads; identical keys are last-write-wins, which
    is harmless as long as the oracle is deterministic.
    """

    def __init__(self) -> None:
        self._entries: dict[Hashable, bool] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: Hashable) -> bool:
        return self.get(key) is not None

    def get(self, key: Hashable) -> bool | None:
        with self._lock:
            return self._entries.get(key)

    def put(self, key: Hashable, verdict: bool) -> None:
        with self._lock:
            self._entries[key] = bool(verdict)

    def lookup(self, key: Hashable) -> bool | None:
        """Like :meth:`get` but updates the hit/miss counters."""
        with self._lock:
            verdict = self._entries.get(key)
            if verdict is None:
                self.misses += 1
            else:
                self.hits += 1
        return verdict


def cached_verdict(cache: OracleCache | None, oracle: Callable[[Any], bool], content: Any,
                   key: Hashable | None = None) -> tuple[bool, bool]:
    """Return ``(verdict, hit)`` for ``content``.

    The cache key is the digest of ``content`` (which must then be bytes)
    unless an explicit ``key`` is given. On a miss the oracle runs exactly
    once and its verdict is stored. Exceptions raised by the oracle
    propagate and nothing is cached.
    """
    if cache is None:
        return bool(oracle(content)), False
    if key is None:
        key = content_digest(content)
    verdict = cache.lookup(key)
    if verdict is not None:
        return verdict, True
    verdict = bool(oracle(content))
    cache.put(key, verdict)
    return verdict, False


class CachedOracle:
    """Counting, caching adapter between a list algorithm and a property test.

    The algorithms call this with a candidate :class:`WeightedList`. With a
    ``render`` function the candidate is turned into bytes, the cache is keyed
    by their digest and ``oracle`` receives the bytes. Without one, ``oracle``
    receives the candidate itself and the cache is keyed by the exact element
    sequence.

    ``tests`` counts real oracle invocations, ``queries`` counts every call
    including cache hits.
    """

    def __init__(
        self,
        oracle: Callable[[Any], bool],
        render: Callable[[WeightedList], bytes] | None = None,
        cache: OracleCache | None = None,
        *,
        use_cache: bool = True,
        log: Callable[[dict], None] | None = None,
    ) -> None:
        self.oracle = oracle
        self.render = render
        self.cache = (cache if cache is not None else OracleCache()) if use_cache else None
        self.log = log
        self.tests = 0
        self.queries = 0
        self.hits = 0

    def _invoke(self, content: Any) -> bool:
        self.tests += 1
        return self.oracle(content)

    def __call__(self, candidate: WeightedList) -> bool:
        self.queries += 1
        if self.render is None:
            key = candidate if self.cache is not None else None
            verdict, hit = cached_verdict(self.cache, self._invoke, candidate, key)
        else:
            verdict, hit = cached_verdict(self.cache, self._invoke, self.render(candidate))
        if hit:
            self.hits += 1
        if self.log is not None:
            self.log({
                "event": "test",
                "elements": len(candidate),
                "weight": candidate.total_weight(),
                "verdict": verdict,
                "cached": hit,
            })
        return verdict
