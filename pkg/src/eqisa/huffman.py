"""Huffman code construction shared by the instruction codec and the byte compressor."""
from __future__ import annotations

import heapq
import itertools
from collections.abc import Hashable, Mapping


class _Node:
    __slots__ = ("symbol", "left", "right")

    def __init__(self, symbol=None, left=None, right=None):
        self.symbol = symbol
        self.left = left
        self.right = right


def huffman_codes(freqs: Mapping[Hashable, float]) -> dict:
    """Optimal prefix code for the positive-weight symbols of ``freqs``.

    Zero-weight symbols get no code. Ties are broken deterministically: nodes
    are ordered by weight, then by the smallest symbol they contain; the first
    node popped becomes the left (``0``) child. A lone symbol gets ``"0"``.

    Raises:
        ValueError: if no symbol has positive weight or a weight is negative.
    """
    if any(w < 0 for w in freqs.values()):
        raise ValueError("frequencies must be nonnegative")
    live = sorted((s for s, w in freqs.items() if w > 0))
    if not live:
        raise ValueError("cannot build a Huffman code: all frequencies are zero")
    if len(live) == 1:
        return {live[0]: "0"}
    counter = itertools.count()
    heap = [(freqs[s], s, next(counter), _Node(symbol=s)) for s in live]
    heapq.heapify(heap)
    while len(heap) > 1:
        w1, k1, _, a = heapq.heappop(heap)
        w2, k2, _, b = heapq.heappop(heap)
        heapq.heappush(heap, (w1 + w2, min(k1, k2), next(counter), _Node(left=a, right=b)))
    codes: dict = {}
    stack = [(heap[0][3], "")]
    while stack:
        node, prefix = stack.pop()
        if node.symbol is not None or (node.left is None and node.right is None):
            codes[node.symbol] = prefix
            continue
        stack.append((node.right, prefix + "1"))
        stack.append((node.left, prefix + "0"))
    return codes


def code_lengths(freqs: Mapping[Hashable, float]) -> dict:
    return {s: len(c) for s, c in huffman_codes(freqs).items()}


def code_cost(codes: Mapping[Hashable, str], freqs: Mapping[Hashable, float]) -> float:
    """Total encoded length ``sum(freq * len(code))`` over symbols with nonzero weight."""
    total = 0
    for s, w in freqs.items():
        if w:
            total += w * len(codes[s])
    return total


def canonical_codes(lengths: Mapping[Hashable, int]) -> dict:
    """Canonical prefix code for given code lengths (sorted by length, then symbol)."""
    items = sorted(((ln, s) for s, ln in lengths.items() if ln > 0))
    codes = {}
    code = 0
    prev = 0
    for ln, s in items:
        code <<= ln - prev
        codes[s] = format(code, f"0{ln}b")
        code += 1
        prev = ln
    return codes


def is_prefix_free(codes) -> bool:
    words = sorted(codes)
    return all(not b.startswith(a) for a, b in zip(words, words[1:])) and len(set(words)) == len(words)


def kraft_sum(codes) -> float:
    return sum(2.0 ** -len(c) for c in codes)
