"""Set partitions as restricted-growth strings."""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator


def iter_rgs(n: int) -> Iterator[tuple[int, ...]]:
    """All restricted-growth strings of length n in lexicographic order.

    a[0] = 0 and a[i] <= 1 + max(a[:i]); each string is one set partition.
    """
    if n == 0:
        yield ()
        return
    a = [0] * n
    m = [0] * n  # m[i] = max(a[:i+1])
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and a[i] == m[i - 1] + 1:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        m[i] = max(m[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            m[j] = m[i]


@lru_cache(maxsize=None)
def completions(remaining: int, blocks: int) -> int:
    """Number of ways to extend an RGS prefix with ``blocks`` blocks by ``remaining`` entries."""
    if remaining == 0:
        return 1
    return blocks * completions(remaining - 1, blocks) + completions(remaining - 1, blocks + 1)


def bell(n: int) -> int:
    return completions(n, 0)
