"""Helpers on node sequences shared by the safety code and the metrics."""

from __future__ import annotations

from typing import Iterable, Sequence


def find_subpath(needle: Sequence[int], hay: Sequence[int]) -> int:
    """Index of ``needle`` as a contiguous block of ``hay``, or -1.

    Paths never repeat nodes, so the first node fixes the only candidate offset.
    """
    if not needle or len(needle) > len(hay):
        return -1
    try:
        start = list(hay).index(needle[0])
    except ValueError:
        return -1
    if tuple(hay[start:start + len(needle)]) == tuple(needle):
        return start
    return -1


def is_subpath(needle: Sequence[int], hay: Sequence[int]) -> bool:
    return find_subpath(needle, hay) >= 0


def order_key(p: Sequence[int]):
    return (p[0], -len(p), tuple(p))


def postprocess(paths: Iterable[Sequence[int]]) -> list[tuple[int, ...]]:
    """Drop duplicates and any path contained in another; stable order.

    Output is sorted by first node, then length descending, then lexicographically.
    """
    unique = sorted({tuple(p) for p in paths}, key=lambda p: (-len(p), p))
    kept: list[tuple[int, ...]] = []
    for p in unique:
        if not any(is_subpath(p, q) for q in kept):
            kept.append(p)
    return sorted(kept, key=order_key)
