"""Tree representation of an input and HDD-style level-by-level reduction.

A :class:`TreeDoc` is built from source text in one of four ways:

``delimiters``
    Lexical tokens (identifier/number runs and single punctuation marks).
    Balanced ``()``, ``[]`` and ``{}`` become ``group`` nodes; within the top
    level and within each group, items are split into ``line`` nodes at
    newlines (backslash-newline continues a line). Unbalanced input falls
    back to a flat tree of tokens.
``flat-token``
    One leaf per whitespace-delimited token.
``flat-line``
    One leaf per non-blank line.
``external-json``
    A caller-supplied tree (see :func:`parse_tree_json`).

Every leaf keeps the whitespace that preceded it, so rendering the full tree
reproduces the source exactly.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from typing import Any, Callable

from .algorithms import minimize
from .core import CachedOracle, Element, OracleCache, WeightedList, token_count, tokenize
from .probdd import DEFAULT_P0

__all__ = [
    "FORMATS",
    "Node",
    "TreeDoc",
    "TreeFormatError",
    "build_tree",
    "parse_tree_json",
    "level_elements",
    "render",
    "hdd_reduce",
    "fixpoint_reduce",
]

FORMATS = ("delimiters", "flat-token", "flat-line", "external-json")

_OPENERS = {"(": ")", "[": "]", "{": "}"}
_CLOSERS = {v: k for k, v in _OPENERS.items()}
_CONTINUATION = re.compile(r"\\\r?\n")
_WORD_EDGE = re.compile(r"\w")


class TreeFormatError(ValueError):
    """Malformed external tree document."""


@dataclass(frozen=True, slots=True)
class Node:
    kind: str
    parent: int | None
    depth: int
    children: tuple[int, ...] = ()
    text: str | None = None
    prefix: str = ""
    tokens: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.text is not None


@dataclass(frozen=True)
class TreeDoc:
    """Immutable tree plus the set of deleted nodes.

    Deleting a node removes its whole subtree. ``suffix`` is the trailing
    whitespace after the last leaf.
    """

    nodes: tuple[Node, ...]
    suffix: str = ""
    deleted: frozenset[int] = frozenset()
    _preorder: tuple[int, ...] = field(default=(), repr=False, compare=False)
    _end: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self._preorder:
            order: list[int] = []
            end = [0] * len(self.nodes)
            stack = [(0, False)]
            while stack:
                nid, done = stack.pop()
                if done:
                    end[nid] = len(order)
                    continue
                order.append(nid)
                stack.append((nid, True))
                stack.extend((c, False) for c in reversed(self.nodes[nid].children))
            # _end is indexed by preorder position: one past the subtree
            object.__setattr__(self, "_preorder", tuple(order))
            object.__setattr__(self, "_end", tuple(end[n] for n in order))

    root = 0

    @property
    def height(self) -> int:
        return max(n.depth for n in self.nodes)

    def with_deleted(self, ids) -> "TreeDoc":
        return TreeDoc(self.nodes, self.suffix, self.deleted | frozenset(ids), self._preorder, self._end)

    def is_live(self, nid: int) -> bool:
        while nid is not None:
            if nid in self.deleted:
                return False
            nid = self.nodes[nid].parent
        return True

    def live_tokens(self, nid: int = 0, extra_deleted=frozenset()) -> int:
        """Token count of the live part of the subtree under ``nid``."""
        dead = self.deleted | extra_deleted
        total = 0
        stack = [nid]
        while stack:
            n = stack.pop()
            if n in dead:
                continue
            node = self.nodes[n]
            total += node.tokens
            stack.extend(node.children)
        return total

    def live_nodes(self) -> int:
        return sum(1 for n in range(len(self.nodes)) if self.is_live(n))

    def walk(self, extra_deleted=frozenset()):
        """Yield ``(node_id, skipped_before)`` for live leaves in document order."""
        dead = self.deleted | extra_deleted if extra_deleted else self.deleted
        order, end, nodes = self._preorder, self._end, self.nodes
        i = 0
        skipped = False
        while i < len(order):
            nid = order[i]
            if nid in dead:
                i = end[i]
                skipped = True
                continue
            if nodes[nid].text is not None:
                yield nid, skipped
                skipped = False
            i += 1


# --------------------------------------------------------------------------
# building

class _Builder:
    def __init__(self) -> None:
        self.nodes: list[dict] = []

    def add(self, kind: str, parent: int | None, text: str | None = None, prefix: str = "", tokens: int = 0) -> int:
        depth = 0 if parent is None else self.nodes[parent]["depth"] + 1
        self.nodes.append(dict(kind=kind, parent=parent, depth=depth, children=[], text=text,
                               prefix=prefix, tokens=tokens))
        nid = len(self.nodes) - 1
        if parent is not None:
            self.nodes[parent]["children"].append(nid)
        return nid

    def freeze(self, suffix: str) -> TreeDoc:
        nodes = tuple(Node(d["kind"], d["parent"], d["depth"], tuple(d["children"]), d["text"],
                           d["prefix"], d["tokens"]) for d in self.nodes)
        return TreeDoc(nodes, suffix)


def _decode(source: str | bytes) -> str:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8", errors="surrogateescape")
    return source


def _split_tokens(text: str, mode: str) -> tuple[list[tuple[str, str]], str]:
    pieces = []
    pos = 0
    for tok in tokenize(text, mode):
        pieces.append((text[pos:tok.start], tok.text))
        pos = tok.end
    return pieces, text[pos:]


def _balanced(pieces: list[tuple[str, str]]) -> bool:
    stack = []
    for _, text in pieces:
        if text in _OPENERS:
            stack.append(text)
        elif text in _CLOSERS:
            if not stack or stack.pop() != _CLOSERS[text]:
                return False
    return not stack


def _group(pieces, start: int, stop_at: str | None):
    """Nest tokens from ``start``; returns (items, next index). Items are ints or tuples."""
    items: list[Any] = []
    i = start
    while i < len(pieces):
        text = pieces[i][1]
        if stop_at is not None and text == stop_at:
            return items, i
        if text in _OPENERS:
            inner, close = _group(pieces, i + 1, _OPENERS[text])
            items.append((i, inner, close))
            i = close + 1
        else:
            items.append(i)
            i += 1
    return items, i


def _first_piece(item) -> int:
    return item if isinstance(item, int) else item[0]


def _lines(items, pieces) -> list[list[Any]]:
    lines: list[list[Any]] = []
    for item in items:
        prefix = pieces[_first_piece(item)][0]
        if not lines or "\n" in _CONTINUATION.sub("", prefix):
            lines.append([item])
        else:
            lines[-1].append(item)
    return lines


def _emit(builder: _Builder, parent: int, items, pieces) -> None:
    lines = _lines(items, pieces)
    if len(lines) == 1:
        for item in lines[0]:
            _emit_item(builder, parent, item, pieces)
        return
    for line in lines:
        if len(line) == 1:
            _emit_item(builder, parent, line[0], pieces)
        else:
            nid = builder.add("line", parent)
            for item in line:
                _emit_item(builder, nid, item, pieces)


def _emit_item(builder: _Builder, parent: int, item, pieces) -> None:
    if isinstance(item, int):
        prefix, text = pieces[item]
        builder.add("token", parent, text, prefix, 1)
        return
    open_i, inner, close_i = item
    nid = builder.add("group", parent)
    builder.add("token", nid, pieces[open_i][1], pieces[open_i][0], 1)
    _emit(builder, nid, inner, pieces)
    builder.add("token", nid, pieces[close_i][1], pieces[close_i][0], 1)


def build_tree(source: str | bytes, format: str = "delimiters") -> TreeDoc:
    """Build a :class:`TreeDoc` from ``source``."""
    if format == "external-json":
        return parse_tree_json(source)
    text = _decode(source)
    builder = _Builder()
    root = builder.add("root", None)
    if format == "flat-token":
        pieces, suffix = _split_tokens(text, "whitespace")
        for prefix, tok in pieces:
            builder.add("token", root, tok, prefix, 1)
    elif format == "flat-line":
        pieces, suffix = _split_tokens(text, "line")
        for prefix, line in pieces:
            builder.add("line", root, line, prefix, token_count(line))
    elif format == "delimiters":
        pieces, suffix = _split_tokens(text, "lexical")
        nested = False
        if _balanced(pieces):
            try:
                _emit(builder, root, _group(pieces, 0, None)[0], pieces)
                nested = True
            except RecursionError:
                # nesting too deep to walk recursively; fall back to flat
                builder = _Builder()
                root = builder.add("root", None)
        if not nested:
            for prefix, tok in pieces:
                builder.add("token", root, tok, prefix, 1)
    else:
        raise ValueError(f"unknown tree format {format!r}; choose from {', '.join(FORMATS)}")
    return builder.freeze(suffix)


def parse_tree_json(document: str | bytes) -> TreeDoc:
    """Load an external tree.

    The document holds one root object. Every node has a string ``kind`` and
    exactly one of ``text`` (a leaf; its weight is its whitespace-token count)
    or ``children`` (a list of nodes). Leaf texts are rendered verbatim, in
    order.
    """
    text = _decode(document)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeFormatError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    builder = _Builder()

    def visit(obj, parent: int | None, path: str) -> None:
        if not isinstance(obj, dict):
            raise TreeFormatError(f"{path}: expected an object, got {type(obj).__name__}")
        kind = obj.get("kind")
        if not isinstance(kind, str):
            raise TreeFormatError(f"{path}: missing or non-string 'kind'")
        has_text, has_children = "text" in obj, "children" in obj
        if has_text == has_children:
            raise TreeFormatError(f"{path}: exactly one of 'text' or 'children' is required")
        unknown = set(obj) - {"kind", "text", "children"}
        if unknown:
            raise TreeFormatError(f"{path}: unexpected field(s) {', '.join(sorted(unknown))}")
        if has_text:
            if not isinstance(obj["text"], str):
                raise TreeFormatError(f"{path}.text: expected a string")
            builder.add(kind, parent, obj["text"], "", token_count(obj["text"]))
            return
        children = obj["children"]
        if not isinstance(children, list):
            raise TreeFormatError(f"{path}.children: expected an array")
        nid = builder.add(kind, parent)
        for i, child in enumerate(children):
            visit(child, nid, f"{path}.children[{i}]")

    visit(data, None, "root")
    return builder.freeze("")


# --------------------------------------------------------------------------
# rendering and levels

def render(tree: TreeDoc, extra_deleted=frozenset()) -> bytes:
    """Concatenate the live leaves with the whitespace that preceded them.

    When leaves were deleted, the first surviving leaf drops its leading
    whitespace, and a space is inserted where two word characters would
    otherwise run together.
    """
    out: list[str] = []
    nodes = tree.nodes
    for nid, skipped in tree.walk(extra_deleted):
        node = nodes[nid]
        prefix = node.prefix
        if skipped:
            if not out:
                prefix = ""
            elif not prefix and node.text and _WORD_EDGE.match(node.text[0]) and _WORD_EDGE.match(out[-1][-1:] or " "):
                prefix = " "
        out.append(prefix + node.text)
    out.append(tree.suffix)
    return "".join(out).encode("utf-8", errors="surrogateescape")


def level_elements(tree: TreeDoc, depth: int) -> WeightedList:
    """Live nodes at ``depth`` in document order, weighted by live subtree tokens.

    Each element's payload is the node id.
    """
    ids = [n for n in tree._preorder if tree.nodes[n].depth == depth and tree.is_live(n)]
    return WeightedList(Element(i, tree.live_tokens(n), n) for i, n in enumerate(ids))


def _level_oracle(tree: TreeDoc, view: WeightedList, oracle: Callable[[bytes], bool],
                  cache: OracleCache | None, log) -> CachedOracle:
    all_nodes = frozenset(view.payloads)

    def render_candidate(candidate: WeightedList) -> bytes:
        return render(tree, all_nodes.difference(candidate.payloads))

    return CachedOracle(oracle, render=render_candidate, cache=cache, use_cache=cache is not None, log=log)


def hdd_reduce(
    tree: TreeDoc,
    algorithm: str,
    oracle: Callable[[bytes], bool],
    *,
    cache: OracleCache | None = None,
    p0: float = DEFAULT_P0,
    rng: random.Random | None = None,
    log: Callable[[dict], None] | None = None,
) -> TreeDoc:
    """One top-down sweep: minimize every level with the chosen list algorithm.

    ``oracle`` receives rendered candidate bytes. Each level's minimized
    selection is committed before moving to the next depth. With ``log``
    set, test records and one ``invocation`` record per level are emitted.
    """
    for depth in range(1, tree.height + 1):
        view = level_elements(tree, depth)
        if not view:
            continue
        level_oracle = _level_oracle(tree, view, oracle, cache, log)
        kept = minimize(view, level_oracle, algorithm, p0=p0, rng=rng)
        kept_ids = {e.id for e in kept}
        if log is not None:
            log({
                "event": "invocation",
                "algorithm": algorithm,
                "depth": depth,
                "weights": list(view.weights),
                "kept": sorted(kept_ids),
                "tests": level_oracle.tests,
            })
        removed = [e.payload for e in view if e.id not in kept_ids]
        if removed:
            tree = tree.with_deleted(removed)
    return tree


def fixpoint_reduce(
    tree: TreeDoc,
    algorithm: str,
    oracle: Callable[[bytes], bool],
    *,
    max_passes: int | None = None,
    passes: list[int] | None = None,
    **kwargs,
) -> TreeDoc:
    """Repeat :func:`hdd_reduce` until a whole pass deletes nothing.

    ``passes``, if given, receives the number of nodes deleted by each pass
    (the last entry is 0 unless ``max_passes`` stopped the loop).
    """
    count = 0
    while max_passes is None or count < max_passes:
        before = tree.live_nodes()
        tree = hdd_reduce(tree, algorithm, oracle, **kwargs)
        removed = before - tree.live_nodes()
        count += 1
        if passes is not None:
            passes.append(removed)
        if removed == 0:
            break
    return tree
