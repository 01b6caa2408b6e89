"""Dyadic intervals, rectangles, shape vectors and Haar synthesis on grids."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ResolutionError, SignFileError
from .grid import FLOAT, INTEGER, GridFunction, check_budget


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """The interval ``[j 2^-k, (j+1) 2^-k)`` inside ``[0, 1)``."""

    level: int
    position: int

    def __post_init__(self):
        if self.level < 0 or not 0 <= self.position < (1 << self.level):
            raise ValueError(f"no dyadic interval at level {self.level}, position {self.position}")

    @property
    def left(self) -> "DyadicInterval":
        return DyadicInterval(self.level + 1, 2 * self.position)

    @property
    def right(self) -> "DyadicInterval":
        return DyadicInterval(self.level + 1, 2 * self.position + 1)

    @property
    def length(self) -> float:
        return 2.0 ** -self.level

    def cells(self, m: int) -> range:
        """Indices of the resolution-``m`` cells covering this interval."""
        if m < self.level:
            raise ResolutionError(f"m={m} is coarser than interval level {self.level}")
        width = 1 << (m - self.level)
        return range(self.position * width, (self.position + 1) * width)


@dataclass(frozen=True)
class DyadicRectangle:
    sides: tuple[DyadicInterval, ...]

    @property
    def d(self) -> int:
        return len(self.sides)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(s.level for s in self.sides)

    @property
    def volume_exponent(self) -> int:
        """``n`` such that the volume is ``2^-n``."""
        return sum(self.shape)

    @property
    def volume(self) -> float:
        return 2.0 ** -self.volume_exponent

    @classmethod
    def from_shape(cls, r: Sequence[int], position: Sequence[int]) -> "DyadicRectangle":
        return cls(tuple(DyadicInterval(k, j) for k, j in zip(r, position)))


def shape_length(r: Sequence[int]) -> int:
    return sum(r)


def enumerate_shapes(n: int, d: int) -> list[tuple[int, ...]]:
    """All ``r`` in N^d with ``|r| = n``, in lexicographic order."""
    if n < 0 or d < 1:
        raise ValueError("need n >= 0 and d >= 1")
    if d == 1:
        return [(n,)]
    out = []
    for first in range(n + 1):
        for rest in enumerate_shapes(n - first, d - 1):
            out.append((first,) + rest)
    return out


def count_shapes(n: int, d: int) -> int:
    return math.comb(n + d - 1, d - 1)


def haar_value(interval: DyadicInterval, cell: int, m: int) -> int:
    """``h_I`` on the resolution-``m`` cell with index ``cell``."""
    if m <= interval.level:
        raise ResolutionError(
            f"m={m} cannot resolve the halves of a level-{interval.level} interval"
        )
    if not 0 <= cell < (1 << m):
        raise ValueError(f"cell {cell} outside a grid of {1 << m} cells")
    if cell >> (m - interval.level) != interval.position:
        return 0
    return 1 if (cell >> (m - interval.level - 1)) & 1 else -1


def haar_pattern(level: int, m: int) -> np.ndarray:
    """Per-cell sign of the Haar functions at ``level`` (``-1`` left half, ``+1`` right)."""
    if m <= level:
        raise ResolutionError(f"m={m} cannot resolve the halves of level {level}")
    idx = np.arange(1 << m)
    return np.where((idx >> (m - level - 1)) & 1, 1, -1).astype(np.int8)


def _check_shape_signs(r: Sequence[int], signs: np.ndarray, m: int) -> np.ndarray:
    signs = np.asarray(signs)
    if signs.size != 1 << sum(r):
        raise SignFileError(f"shape {tuple(r)} needs {1 << sum(r)} signs, got {signs.size}")
    if max(r, default=0) + 1 > m:
        raise ResolutionError(f"m={m} is too coarse for shape {tuple(r)}")
    return signs


def synthesize(r: Sequence[int], signs, m: int, *, as_array: bool = False):
    """Grid values of ``sum_p signs[p] h_{R(r, p)}`` at resolution ``m``.

    ``signs`` is indexed by the flattened rectangle position, first axis most
    significant.  Coefficients need not be ``+-1``; integer coefficients give
    an integer grid, anything else a float grid.
    """
    r = tuple(int(k) for k in r)
    d = len(r)
    signs = _check_shape_signs(r, signs, m)
    check_budget(d, m)
    coeffs = signs.reshape(tuple(1 << k for k in r))
    exact = np.issubdtype(coeffs.dtype, np.integer)
    vals = coeffs.astype(np.int64 if exact else np.float64)
    for axis, k in enumerate(r):
        vals = np.repeat(vals, 1 << (m - k), axis=axis)
        bcast = [1] * d
        bcast[axis] = 1 << m
        vals = vals * haar_pattern(k, m).reshape(bcast)
    if as_array:
        return vals
    return GridFunction(d, m, vals, INTEGER if exact else FLOAT)


def synthesize_sum(shapes: Sequence[Sequence[int]], sign_arrays: Sequence, m: int,
                   d: int) -> GridFunction:
    """Direct reference path: ``sum_r synthesize(r, signs_r, m)``."""
    check_budget(d, m)
    acc = np.zeros((1 << m,) * d, dtype=np.int64)
    for r, s in zip(shapes, sign_arrays):
        acc += synthesize(r, s, m, as_array=True)
    return GridFunction(d, m, acc, INTEGER)


def inverse_haar_axis(c: np.ndarray, axis: int) -> np.ndarray:
    """Unnormalized inverse Haar transform along one axis.

    Index 0 holds the coefficient of the constant function and index
    ``2^k + j`` the coefficient of ``h_{[j 2^-k, (j+1) 2^-k)}``.  Each stage is
    the butterfly ``(s - w, s + w)``, matching ``h = -1`` left, ``+1`` right.
    """
    c = np.moveaxis(c, axis, 0)
    size = c.shape[0]
    m = size.bit_length() - 1
    s = c[:1]
    for k in range(m):
        w = c[1 << k: 2 << k]
        nxt = np.empty((2 << k,) + c.shape[1:], dtype=c.dtype)
        nxt[0::2] = s - w
        nxt[1::2] = s + w
        s = nxt
    return np.moveaxis(s, 0, axis)


def synthesize_sum_butterfly(shapes: Sequence[Sequence[int]], sign_arrays: Sequence, m: int,
                             d: int) -> GridFunction:
    """Fast path: place all coefficients in a Haar coefficient cube, invert per axis.

    Must agree bit-exactly with :func:`synthesize_sum` in integer mode.
    """
    check_budget(d, m)
    coeffs = np.zeros((1 << m,) * d, dtype=np.int64)
    for r, s in zip(shapes, sign_arrays):
        s = _check_shape_signs(r, s, m)
        block = tuple(slice(1 << k, 2 << k) for k in r)
        coeffs[block] += np.asarray(s, dtype=np.int64).reshape(tuple(1 << k for k in r))
    for axis in range(d):
        coeffs = inverse_haar_axis(coeffs, axis)
    return GridFunction(d, m, coeffs, INTEGER)


def square_function(coeffs: Mapping[DyadicInterval, float], m: int) -> GridFunction:
    """One-dimensional ``(sum_I a_I^2 1_I)^(1/2)`` on the resolution-``m`` grid."""
    check_budget(1, m)
    acc = np.zeros(1 << m, dtype=np.float64)
    for interval, a in coeffs.items():
        if interval.level >= m:
            raise ResolutionError(f"m={m} is too coarse for interval level {interval.level}")
        cells = interval.cells(m)
        acc[cells.start:cells.stop] += float(a) ** 2
    return GridFunction(1, m, np.sqrt(acc), FLOAT)


def rectangles(r: Sequence[int]):
    """All rectangles of shape ``r`` in flattened position order."""
    for pos in itertools.product(*(range(1 << k) for k in r)):
        yield DyadicRectangle.from_shape(r, pos)
