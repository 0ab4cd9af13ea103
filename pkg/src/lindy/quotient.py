"""Interval partition ``(I_j)`` of ``[0, 1)``, step functions and the quotient
map ``Q_p(e_j) = |I_j|^{-1/p} 1_{I_j}``.

``I_1 = [0, 1)`` and, for ``j`` in ``[sigma(k), sigma(k+1))``, ``I_j`` is the
``(j - sigma(k))``-th of the ``d_k`` equal pieces of ``I_k``.  Endpoints are
exact rationals.  Values are exact when ``1/p`` is an integer ``q``: then
``|I_j|^{-1/p} = (1/|I_j|)^q`` is an integer.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .indexing import IndexTables
from .sparse import Enclosure, PContext, Scalar, SparseVector, _iroot_bounds


@dataclass(frozen=True)
class DyadicInterval:
    left: Fraction
    right: Fraction
    path: tuple[tuple[int, int], ...]  # (parent index, child ordinal) from I_1 down

    @property
    def length(self) -> Fraction:
        return self.right - self.left


class IntervalTree:
    """Memoized ``j -> I_j`` for one set of index tables."""

    def __init__(self, tables: IndexTables):
        self.tables = tables
        self._cache: dict[int, tuple[Fraction, Fraction]] = {1: (Fraction(0), Fraction(1))}

    def bounds(self, j: int) -> tuple[Fraction, Fraction]:
        got = self._cache.get(j)
        if got is not None:
            return got
        t = self.tables
        k = t.rho(j)
        lo, hi = self.bounds(k)
        width = (hi - lo) / t.dn(k)
        left = lo + (j - t.sigma(k)) * width
        got = self._cache[j] = (left, left + width)
        return got

    def interval(self, j: int) -> DyadicInterval:
        t = self.tables
        path = []
        orbit = t.rho_orbit(j)
        for child, parent in zip(orbit[-2::-1], orbit[:0:-1]):
            path.append((parent, child - t.sigma(parent)))
        lo, hi = self.bounds(j)
        return DyadicInterval(lo, hi, tuple(path))


def interval(tables: IndexTables, j: int) -> DyadicInterval:
    return IntervalTree(tables).interval(j)


@dataclass(frozen=True)
class StepFunction:
    """Piecewise constant function on ``[0, 1)``: value ``values[i]`` on
    ``[breaks[i], breaks[i+1])``.  Adjacent equal pieces are always merged."""

    breaks: tuple[Fraction, ...]
    values: tuple[Scalar, ...]

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls((Fraction(0), Fraction(1)), (0,))

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[Fraction, Fraction, Scalar]]) -> "StepFunction":
        """Sum of ``value * 1_[left, right)`` over the pieces, flattened.

        Float values are accumulated as exact binary rationals so that
        cancelling pieces leave exact zeros (``|tiny|^p`` is not tiny).
        """
        deltas: dict[Fraction, Scalar] = {Fraction(0): 0, Fraction(1): 0}
        floats = False
        for lo, hi, val in pieces:
            if not val or lo >= hi:
                continue
            if isinstance(val, float):
                floats, val = True, Fraction(val)
            deltas[lo] = deltas.get(lo, 0) + val
            deltas[hi] = deltas.get(hi, 0) - val
        points = sorted(deltas)
        breaks = [points[0]]
        values = []
        acc = 0
        for a, b in zip(points, points[1:]):
            acc += deltas[a]
            acc_out = float(acc) if floats else acc
            if values and values[-1] == acc_out:
                breaks[-1] = b
            else:
                values.append(acc_out)
                breaks.append(b)
        return cls(tuple(breaks), tuple(values))

    def pieces(self):
        return list(zip(self.breaks, self.breaks[1:], self.values))

    @property
    def is_zero(self) -> bool:
        return all(not v for v in self.values)

    def __call__(self, t) -> Scalar:
        for lo, hi, v in self.pieces():
            if lo <= t < hi:
                return v
        raise ValueError("step functions live on [0, 1)")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_left", "t_right", "value"])
        for lo, hi, v in self.pieces():
            w.writerow([_fmt(lo), _fmt(hi), _fmt(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "StepFunction":
        rows = list(csv.reader(io.StringIO(text)))
        pieces = [(Fraction(a), Fraction(b), _parse(v)) for a, b, v in rows[1:]]
        return cls.from_pieces(pieces)


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _parse(s: str):
    try:
        return Fraction(s)
    except ValueError:
        return float(s)


def h_weight(length: Fraction, ctx: PContext) -> Scalar:
    """``|I|^{-1/p}``; an integer in exact mode."""
    if ctx.exact:
        inv = 1 / length
        return inv**ctx.q
    return float(length) ** (-1 / ctx.p)


def q_map(tables: IndexTables, ctx: PContext, v: SparseVector, tree: IntervalTree | None = None) -> StepFunction:
    """``sum v(j) |I_j|^{-1/p} 1_{I_j}``."""
    tree = tree or IntervalTree(tables)
    pieces = []
    for j, x in v.items():
        lo, hi = tree.bounds(j)
        pieces.append((lo, hi, x * h_weight(hi - lo, ctx)))
    return StepFunction.from_pieces(pieces)


def step_power_sum(f: StepFunction, ctx: PContext):
    """``sum |value|^p * length``; an :class:`Enclosure` in exact mode."""
    if ctx.exact:
        lo = hi = Fraction(0)
        for a, b, v in f.pieces():
            if v:
                e = _iroot_bounds(abs(Fraction(v)), ctx.q, 160)
                lo += e.lo * (b - a)
                hi += e.hi * (b - a)
        return Enclosure(lo, hi)
    return math.fsum(abs(float(v)) ** ctx.p * float(b - a) for a, b, v in f.pieces())


def step_p_norm(f: StepFunction, ctx: PContext) -> tuple[object, float]:
    """``(power sum, norm)`` in ``L_p[0, 1)``."""
    s = step_power_sum(f, ctx)
    return s, ctx.root(s)


def level_partition_ok(tables: IndexTables, n: int, tree: IntervalTree | None = None) -> bool:
    """``(I_j)_{j in J_n}`` tiles ``[0, 1)`` in order with diameters at most ``2^-n``."""
    tree = tree or IntervalTree(tables)
    lo, hi = tables.level_interval(n)
    edge = Fraction(0)
    for j in range(lo, hi):
        a, b = tree.bounds(j)
        if a != edge or b - a > Fraction(1, 2**n):
            return False
        edge = b
    return edge == 1
