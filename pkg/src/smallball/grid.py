"""Exact piecewise-constant functions on the uniform dyadic grid of [0,1)^d.

A :class:`GridFunction` holds one scalar per cell of side ``2**-m``.  Values
are stored as a d-dimensional array of shape ``(2**m,) * d`` in C order, so
the flattened layout has axis 1 most significant and, within an axis, the
most significant index bit is the coarsest dyadic split.

Three scalar modes are supported:

``integer``
    int64 values (Haar sums).
``rational``
    integer numerators (int64, or Python ints in an object array when int64
    could overflow) over one shared positive ``denominator``.
``float``
    float64 values.

Reductions in the exact modes return :class:`fractions.Fraction`.
"""
from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import GridTooLargeError, ModeError, ShapeMismatchError

INTEGER, RATIONAL, FLOAT = "integer", "rational", "float"
MODES = (INTEGER, RATIONAL, FLOAT)

DEFAULT_CELL_BUDGET = 1 << 28
DEFAULT_RATIONAL_BUDGET = 1 << 22

_cell_budget = contextvars.ContextVar("cell_budget", default=DEFAULT_CELL_BUDGET)

# numerator magnitudes above this are moved to Python ints
_INT64_SAFE = 1 << 62


def get_cell_budget() -> int:
    return _cell_budget.get()


@contextlib.contextmanager
def cell_budget(cells: int):
    """Temporarily change the maximum number of grid cells."""
    token = _cell_budget.set(int(cells))
    try:
        yield
    finally:
        _cell_budget.reset(token)


def check_budget(d: int, m: int, budget: int | None = None) -> int:
    cells = 1 << (d * m)
    limit = get_cell_budget() if budget is None else budget
    if cells > limit:
        raise GridTooLargeError(
            f"grid with d={d}, m={m} has 2^{d * m} cells, budget is {limit}"
        )
    return cells


def _max_abs(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    if a.dtype == object:
        return max(abs(int(v)) for v in a.flat)
    return int(np.abs(a).max())


def _as_exact(a: np.ndarray, bound: int) -> np.ndarray:
    """Return ``a`` as int64 if ``bound`` allows it, else as Python ints."""
    if bound < _INT64_SAFE:
        return a.astype(np.int64, copy=False)
    return a.astype(object)


def exact_sum(a: np.ndarray) -> int:
    """Exact integer sum of an integer array without int64 overflow."""
    if a.dtype != object and _max_abs(a) * a.size < _INT64_SAFE:
        return int(a.sum(dtype=np.int64))
    return int(a.astype(object).sum())


def exact_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    bound = _max_abs(a) * _max_abs(b)
    if a.dtype != object and b.dtype != object and bound < _INT64_SAFE:
        return a.astype(np.int64, copy=False) * b.astype(np.int64, copy=False)
    return a.astype(object) * b.astype(object)


def exact_dot(a: np.ndarray, b: np.ndarray) -> int:
    """Exact integer sum of ``a * b``."""
    bound = _max_abs(a) * _max_abs(b)
    if a.dtype != object and b.dtype != object and bound * a.size < _INT64_SAFE:
        return int(np.dot(a.ravel().astype(np.int64), b.ravel().astype(np.int64)))
    return int(np.dot(a.ravel().astype(object), b.ravel().astype(object)))


def exact_power_sum(a: np.ndarray, p: int) -> int:
    """Exact ``sum(|a|**p)`` for a non-negative integer ``p``."""
    a = np.abs(a)
    bound = _max_abs(a) ** p
    if a.dtype != object and bound * a.size < _INT64_SAFE:
        return int((a.astype(np.int64) ** p).sum())
    # group equal values; integer grids have few distinct values
    vals, counts = np.unique(a.ravel(), return_counts=True)
    return sum(int(v) ** p * int(c) for v, c in zip(vals, counts))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Immutable cell-constant function on the dyadic grid of resolution ``m``."""

    d: int
    m: int
    values: np.ndarray
    mode: str = INTEGER
    denominator: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown scalar mode {self.mode!r}")
        side = 1 << self.m
        vals = np.asarray(self.values)
        if vals.size != side ** self.d:
            raise ShapeMismatchError(
                f"expected {side ** self.d} cells for d={self.d}, m={self.m}, got {vals.size}"
            )
        vals = vals.reshape((side,) * self.d)
        if self.mode == FLOAT:
            vals = vals.astype(np.float64, copy=False)
        elif vals.dtype != object:
            if not np.issubdtype(vals.dtype, np.integer):
                raise ModeError(f"{self.mode} mode needs integer values, got {vals.dtype}")
            vals = vals.astype(np.int64, copy=False)
        if self.mode == RATIONAL:
            if int(self.denominator) <= 0:
                raise ValueError("denominator must be positive")
            object.__setattr__(self, "denominator", int(self.denominator))
        elif self.denominator != 1:
            raise ValueError("only rational mode carries a denominator")
        if vals.flags.writeable:
            vals = vals.copy()
            vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    # construction helpers

    @classmethod
    def constant(cls, d: int, m: int, value=1) -> "GridFunction":
        check_budget(d, m)
        shape = (1 << m,) * d
        if isinstance(value, float):
            return cls(d, m, np.full(shape, value, dtype=np.float64), FLOAT)
        if isinstance(value, Fraction) and value.denominator != 1:
            return cls(d, m, np.full(shape, value.numerator, dtype=np.int64), RATIONAL,
                       value.denominator)
        return cls(d, m, np.full(shape, int(value), dtype=np.int64), INTEGER)

    @classmethod
    def zeros(cls, d: int, m: int) -> "GridFunction":
        return cls.constant(d, m, 0)

    @property
    def n_cells(self) -> int:
        return 1 << (self.d * self.m)

    @property
    def flat(self) -> np.ndarray:
        """Values in cell-major order, axis 1 most significant."""
        return self.values.ravel()

    @property
    def is_exact(self) -> bool:
        return self.mode != FLOAT

    def __repr__(self):
        den = f", denominator={self.denominator}" if self.mode == RATIONAL else ""
        return f"GridFunction(d={self.d}, m={self.m}, mode={self.mode!r}{den})"

    def cell(self, *index):
        """Value of a single cell as an exact scalar (or float)."""
        v = self.values[index]
        if self.mode == FLOAT:
            return float(v)
        if self.mode == RATIONAL:
            return Fraction(int(v), self.denominator)
        return int(v)

    # explicit promotions

    def to_rational(self) -> "GridFunction":
        if self.mode == RATIONAL:
            return self
        if self.mode == FLOAT:
            raise ModeError("float grids cannot be promoted to rational")
        return GridFunction(self.d, self.m, self.values, RATIONAL, 1)

    def to_float(self) -> "GridFunction":
        if self.mode == FLOAT:
            return self
        if self.mode == RATIONAL:
            vals = self.values.astype(object) / self.denominator if self.values.dtype == object \
                else self.values / self.denominator
            return GridFunction(self.d, self.m, np.asarray(vals, dtype=np.float64), FLOAT)
        return GridFunction(self.d, self.m, self.values.astype(np.float64), FLOAT)

    def refine(self) -> "GridFunction":
        """The same function on the grid of resolution ``m + 1``."""
        check_budget(self.d, self.m + 1)
        vals = self.values
        for axis in range(self.d):
            vals = np.repeat(vals, 2, axis=axis)
        return GridFunction(self.d, self.m + 1, vals, self.mode, self.denominator)

    # arithmetic

    def _common(self, other: "GridFunction") -> str:
        if not isinstance(other, GridFunction):
            return NotImplemented
        if (self.d, self.m) != (other.d, other.m):
            raise ShapeMismatchError(
                f"grids differ: (d={self.d}, m={self.m}) vs (d={other.d}, m={other.m})"
            )
        modes = {self.mode, other.mode}
        if FLOAT in modes and len(modes) > 1:
            raise ModeError("mixing float and exact grids needs an explicit to_float()")
        return RATIONAL if RATIONAL in modes else self.mode

    def __add__(self, other):
        return self._addsub(other, 1)

    def __sub__(self, other):
        return self._addsub(other, -1)

    def _addsub(self, other, sign):
        if isinstance(other, (int, Fraction, float)):
            other = _broadcast(self, other)
        mode = self._common(other)
        if mode is NotImplemented:
            return NotImplemented
        if mode == FLOAT:
            return GridFunction(self.d, self.m, self.values + sign * other.values, FLOAT)
        if mode == INTEGER:
            return GridFunction(self.d, self.m, self.values + sign * other.values, INTEGER)
        a, b = self.to_rational(), other.to_rational()
        den = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
        na = _scale_exact(a.values, den // a.denominator)
        nb = _scale_exact(b.values, den // b.denominator)
        bound = _max_abs(na) + _max_abs(nb)
        return GridFunction(self.d, self.m,
                            _as_exact(na, bound) + sign * _as_exact(nb, bound), RATIONAL, den)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, float)):
            return self.scale(other)
        mode = self._common(other)
        if mode is NotImplemented:
            return NotImplemented
        if mode == FLOAT:
            return GridFunction(self.d, self.m, self.values * other.values, FLOAT)
        vals = exact_product(self.values, other.values)
        if mode == INTEGER:
            return GridFunction(self.d, self.m, vals, INTEGER)
        a, b = self.to_rational(), other.to_rational()
        return GridFunction(self.d, self.m, vals, RATIONAL, a.denominator * b.denominator)

    __rmul__ = __mul__

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "GridFunction":
        """Multiply by a scalar; a non-integer rational moves exact grids to rational mode."""
        if self.mode == FLOAT:
            return GridFunction(self.d, self.m, self.values * float(c), FLOAT)
        if isinstance(c, float):
            raise ModeError("scaling an exact grid by a float needs an explicit to_float()")
        c = Fraction(c)
        vals = _scale_exact(self.values, c.numerator)
        if self.mode == INTEGER and c.denominator == 1:
            return GridFunction(self.d, self.m, vals, INTEGER)
        return GridFunction(self.d, self.m, vals, RATIONAL, self.denominator * c.denominator)

    def __pow__(self, k: int):
        out = GridFunction.constant(self.d, self.m, 1)
        if self.mode == FLOAT:
            out = out.to_float()
        for _ in range(int(k)):
            out = out * self
        return out

    def equals(self, other: "GridFunction") -> bool:
        """Cell-exact equality (value-wise, independent of denominator form)."""
        if (self.d, self.m) != (other.d, other.m):
            return False
        if FLOAT in (self.mode, other.mode):
            return bool(np.array_equal(self.to_float().values, other.to_float().values))
        a, b = self.to_rational(), other.to_rational()
        lhs = _scale_exact(a.values, b.denominator)
        rhs = _scale_exact(b.values, a.denominator)
        return bool(np.all(lhs == rhs))

    # reductions

    def total(self):
        """Sum of cell values (exact in exact modes)."""
        if self.mode == FLOAT:
            return float(self.values.sum())
        s = exact_sum(self.values)
        return Fraction(s, self.denominator) if self.mode == RATIONAL else s

    def mean(self):
        """Integral over [0,1)^d."""
        if self.mode == FLOAT:
            return float(self.values.mean())
        return Fraction(exact_sum(self.values), self.n_cells * self.denominator)

    def max_abs(self):
        if self.mode == FLOAT:
            return float(np.abs(self.values).max())
        v = _max_abs(self.values)
        return Fraction(v, self.denominator) if self.mode == RATIONAL else v

    def min(self):
        if self.mode == FLOAT:
            return float(self.values.min())
        v = int(self.values.min())
        return Fraction(v, self.denominator) if self.mode == RATIONAL else v

    def measure_where(self, mask: np.ndarray) -> Fraction:
        """Exact Lebesgue measure of the union of cells selected by ``mask``."""
        return Fraction(int(np.count_nonzero(mask)), self.n_cells)


def _scale_exact(a: np.ndarray, c: int) -> np.ndarray:
    if c == 1:
        return a
    bound = _max_abs(a) * abs(c)
    return _as_exact(a, bound) * (c if bound < _INT64_SAFE else int(c))


def _broadcast(f: GridFunction, c) -> GridFunction:
    g = GridFunction.constant(f.d, f.m, c)
    if f.mode == FLOAT and g.mode != FLOAT:
        g = g.to_float()
    return g


def moment(f: GridFunction, p: int):
    """``E|f|^p`` for a non-negative integer ``p``; exact in exact modes."""
    p = int(p)
    if f.mode == FLOAT:
        return float(np.mean(np.abs(f.values) ** p))
    return Fraction(exact_power_sum(f.values, p), f.n_cells * f.denominator ** p)


def _exact_root(x: Fraction, p: int):
    """``x**(1/p)`` as a Fraction when it is rational, else a float."""
    if x == 0:
        return Fraction(0)
    num, den = x.numerator, x.denominator
    rn = _int_root(num, p)
    rd = _int_root(den, p)
    if rn is not None and rd is not None:
        return Fraction(rn, rd)
    # logs keep huge integers out of float overflow
    return math.exp((math.log(num) - math.log(den)) / p)


def _int_root(x: int, p: int) -> int | None:
    if p == 1:
        return x
    r = round(x ** (1.0 / p)) if x < (1 << 1000) else int(math.exp(math.log(x) / p))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c ** p == x:
            return c
    if p == 2:
        c = math.isqrt(x)
        return c if c * c == x else None
    return None


def lp_norm(f: GridFunction, p):
    """``(E|f|^p)^(1/p)``, or ``max|f|`` for ``p = inf``.

    In exact modes, ``p = 1`` and ``p = inf`` give a Fraction (``int`` in integer
    mode for ``inf``).  Other integer ``p`` give a Fraction when the ``p``-th root
    of the exact moment is rational and a float otherwise; use :func:`moment` for
    the exact ``p``-th power.
    """
    if p == math.inf:
        return f.max_abs()
    if p <= 0:
        raise ValueError("p must be positive")
    if f.mode == FLOAT:
        return float(np.mean(np.abs(f.values) ** p) ** (1.0 / p))
    if float(p).is_integer():
        p = int(p)
        return _exact_root(moment(f, p), p)
    return lp_norm(f.to_float(), p)


def inner_product(f: GridFunction, g: GridFunction):
    """``E[f g]``; exact unless either side is float."""
    if (f.d, f.m) != (g.d, g.m):
        raise ShapeMismatchError(f"grids differ: (d={f.d}, m={f.m}) vs (d={g.d}, m={g.m})")
    if FLOAT in (f.mode, g.mode):
        return float(np.dot(f.to_float().flat, g.to_float().flat)) / f.n_cells
    s = exact_dot(f.values, g.values)
    return Fraction(s, f.n_cells * f.denominator * g.denominator)


def as_fraction(x) -> Fraction:
    if isinstance(x, Rational):
        return Fraction(x)
    raise ModeError(f"{x!r} is not an exact scalar")
