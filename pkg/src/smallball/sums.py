"""r-functions, block sums F_t, the hyperbolic sum H and coincidence sums Phi_t.

All objects live on the canonical grid ``m = n + 1`` where every Haar
function with ``|R| = 2^-n`` is cell-constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import count_shapes, enumerate_shapes, synthesize, synthesize_sum, \
    synthesize_sum_butterfly
from .errors import InvalidBlockError, ParameterError
from .grid import INTEGER, GridFunction, check_budget
from .signs import SignAssignment


@dataclass(frozen=True)
class BlockPartition:
    """Consecutive blocks covering the first-coordinate range ``0..n``.

    Sizes differ by at most one, larger blocks first.  Blocks are 1-indexed
    in the public API.
    """

    n: int
    q: int
    blocks: tuple[range, ...]

    @classmethod
    def build(cls, n: int, q: int) -> "BlockPartition":
        if q < 1 or q > n + 1:
            raise ParameterError(f"q={q} must lie in 1..{n + 1} for n={n}")
        size, extra = divmod(n + 1, q)
        blocks, start = [], 0
        for t in range(q):
            width = size + (1 if t < extra else 0)
            blocks.append(range(start, start + width))
            start += width
        return cls(n, q, tuple(blocks))

    def block(self, t: int) -> range:
        if not 1 <= t <= self.q:
            raise InvalidBlockError(f"block index {t} outside 1..{self.q}")
        return self.blocks[t - 1]

    def block_of(self, r1: int) -> int:
        for t, b in enumerate(self.blocks, start=1):
            if r1 in b:
                return t
        raise ValueError(f"first coordinate {r1} outside 0..{self.n}")

    def as_lists(self) -> list[list[int]]:
        return [[b.start, b.stop - 1] for b in self.blocks]


def canonical_m(n: int) -> int:
    return n + 1


def build_rfunction(r, alpha: SignAssignment) -> GridFunction:
    r = tuple(r)
    return synthesize(r, alpha[r], canonical_m(alpha.n))


def _sum_over(shapes, alpha: SignAssignment) -> GridFunction:
    m = canonical_m(alpha.n)
    return synthesize_sum(shapes, [alpha[r] for r in shapes], m, alpha.d)


def build_hyperbolic_sum(alpha: SignAssignment, *, fast: bool = False) -> GridFunction:
    """``H = sum over r in H_n of f_r``.  ``fast`` selects the butterfly path."""
    if fast:
        return synthesize_sum_butterfly(alpha.shapes, list(alpha.signs.values()),
                                        canonical_m(alpha.n), alpha.d)
    return _sum_over(alpha.shapes, alpha)


def block_shapes(t: int, partition: BlockPartition, d: int) -> list[tuple[int, ...]]:
    rng = partition.block(t)
    return [r for r in enumerate_shapes(partition.n, d) if r[0] in rng]


def build_block_sum(t: int, partition: BlockPartition, alpha: SignAssignment) -> GridFunction:
    _check_partition(partition, alpha)
    return _sum_over(block_shapes(t, partition, alpha.d), alpha)


def count_block(t: int, partition: BlockPartition, n: int, d: int) -> int:
    """``#A_t`` by direct enumeration of shapes."""
    rng = partition.block(t)
    return sum(1 for r in enumerate_shapes(n, d) if r[0] in rng)


def count_block_formula(t: int, partition: BlockPartition, n: int, d: int) -> int:
    """Closed form: each first coordinate ``v`` carries ``C(n - v + d - 2, d - 2)`` shapes."""
    if d == 1:
        return int(n in partition.block(t))
    return sum(count_shapes(n - v, d - 1) for v in partition.block(t))


def _check_partition(partition: BlockPartition, alpha: SignAssignment):
    if partition.n != alpha.n:
        raise ParameterError(f"partition is for n={partition.n}, signs for n={alpha.n}")


def first_coordinate_sum(v: int, alpha: SignAssignment) -> GridFunction:
    """``G_v = sum of f_r over r with r_1 = v``."""
    return _sum_over([r for r in alpha.shapes if r[0] == v], alpha)


def build_coincidence_sum(t: int, partition: BlockPartition, alpha: SignAssignment) -> GridFunction:
    """``Phi_t`` via ``sum_v (G_v^2 - c_v)`` over ``v`` in block ``t``."""
    _check_partition(partition, alpha)
    m = canonical_m(alpha.n)
    check_budget(alpha.d, m)
    acc = np.zeros((1 << m,) * alpha.d, dtype=np.int64)
    for v in partition.block(t):
        group = [r for r in alpha.shapes if r[0] == v]
        if len(group) < 2:
            continue
        g = first_coordinate_sum(v, alpha).values
        acc += g * g - len(group)
    return GridFunction(alpha.d, m, acc, INTEGER)


def coincidence_pairs(t: int, partition: BlockPartition, d: int) -> list[tuple[tuple, tuple]]:
    """Ordered pairs ``r != s`` in ``A_t`` with ``r_1 = s_1``."""
    shapes = block_shapes(t, partition, d)
    return [(r, s) for r in shapes for s in shapes if r != s and r[0] == s[0]]


def build_coincidence_sum_pairs(t: int, partition: BlockPartition,
                                alpha: SignAssignment) -> GridFunction:
    """Reference path for ``Phi_t``: explicit sum of ``f_r f_s`` over ordered pairs."""
    _check_partition(partition, alpha)
    m = canonical_m(alpha.n)
    check_budget(alpha.d, m)
    acc = np.zeros((1 << m,) * alpha.d, dtype=np.int64)
    cache = {}
    for r, s in coincidence_pairs(t, partition, alpha.d):
        for key in (r, s):
            if key not in cache:
                cache[key] = synthesize(key, alpha[key], m, as_array=True)
        acc += cache[r] * cache[s]
    return GridFunction(alpha.d, m, acc, INTEGER)


def l2_floor(n: int, d: int) -> float:
    """``||H||_2 = sqrt(#H_n)`` for every sign assignment."""
    return math.sqrt(count_shapes(n, d))
