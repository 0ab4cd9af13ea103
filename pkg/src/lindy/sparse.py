"""Finitely supported vectors with p-quasinorm and sup-norm arithmetic.

Two scalar modes are supported.  Float mode stores ``float`` values.  Exact
mode stores :class:`fractions.Fraction` values and is available when ``1/p``
is a positive integer ``q``; then ``d**(-1/p) = 1/d**q`` is rational and the
p-th power of a rational is either rational (perfect q-th powers) or enclosed
in a rational interval of configurable width.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

import gmpy2

from .errors import ConfigError

Scalar = Union[float, Fraction]

ROOT_BITS = 160


@dataclass(frozen=True)
class Enclosure:
    """Closed rational interval ``[lo, hi]`` known to contain a real number."""

    lo: Fraction
    hi: Fraction

    @classmethod
    def point(cls, x) -> "Enclosure":
        x = Fraction(x)
        return cls(x, x)

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __add__(self, other):
        if isinstance(other, Enclosure):
            return Enclosure(self.lo + other.lo, self.hi + other.hi)
        other = Fraction(other)
        return Enclosure(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Enclosure):
            return Enclosure(self.lo - other.hi, self.hi - other.lo)
        other = Fraction(other)
        return Enclosure(self.lo - other, self.hi - other)

    def scale(self, c) -> "Enclosure":
        c = Fraction(c)
        a, b = self.lo * c, self.hi * c
        return Enclosure(min(a, b), max(a, b))

    def __float__(self):
        return float((self.lo + self.hi) / 2)

    def __eq__(self, other):
        if isinstance(other, Enclosure):
            return self.lo == other.lo and self.hi == other.hi
        if isinstance(other, (int, Fraction)):
            return self.exact and self.lo == other
        return NotImplemented

    def __hash__(self):
        return hash((self.lo, self.hi))

    def certainly_gt(self, x) -> bool:
        return self.lo > x

    def certainly_le(self, x) -> bool:
        return self.hi <= x

    def overlaps(self, other: "Enclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def root(self, q: int) -> "Enclosure":
        """Enclosure of ``t**q`` for ``t`` in ``self`` (the inverse of ``p``-th power)."""
        return Enclosure(self.lo**q, self.hi**q)


def _iroot_bounds(x: Fraction, q: int, bits: int) -> Enclosure:
    """Rational enclosure of ``x**(1/q)`` for ``x >= 0``; exact when possible."""
    if q == 1 or x == 0:
        return Enclosure(x, x)
    num, den = x.numerator, x.denominator
    rn, en = gmpy2.iroot(gmpy2.mpz(num), q)
    rd, ed = gmpy2.iroot(gmpy2.mpz(den), q)
    if en and ed:
        r = Fraction(int(rn), int(rd))
        return Enclosure(r, r)
    scale = 1 << bits
    # R**q <= num * scale**q / den < (R + 1)**q
    n = (num * scale**q) // den
    r, _ = gmpy2.iroot(gmpy2.mpz(n), q)
    r = int(r)
    return Enclosure(Fraction(r, scale), Fraction(r + 1, scale))


@dataclass(frozen=True)
class PContext:
    """Exponent ``p`` in ``(0, 1]`` and the scalar mode."""

    p: float
    exact: bool = False

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ConfigError(f"p must lie in (0, 1], got {self.p}")
        if self.exact and self.q is None:
            raise ConfigError(f"exact mode needs 1/p to be an integer (p={self.p})")

    @property
    def q(self) -> int | None:
        """``1/p`` when it is an integer, else ``None``."""
        inv = 1 / self.p
        r = round(inv)
        return r if abs(inv - r) < 1e-12 else None

    @classmethod
    def parse(cls, text: str, exact: bool = False) -> "PContext":
        try:
            p = float(Fraction(text.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse p={text!r}") from exc
        return cls(p, exact)

    def scalar(self, x) -> Scalar:
        return Fraction(x) if self.exact else float(x)

    def weight(self, d: int) -> Scalar:
        """``d**(-1/p)``."""
        if self.exact:
            return Fraction(1, d**self.q)
        return d ** (-1.0 / self.p)

    @property
    def two_root(self) -> Scalar:
        """``2**(1/p)``."""
        return Fraction(2**self.q) if self.exact else 2.0 ** (1.0 / self.p)

    def pow_abs(self, x):
        """``|x|**p``: an :class:`Enclosure` in exact mode, a float otherwise."""
        if self.exact:
            return _iroot_bounds(abs(Fraction(x)), self.q, ROOT_BITS)
        return abs(x) ** self.p

    def root(self, s) -> float:
        """Invert a p-th power sum into a norm (always returned as float)."""
        return float(s) ** (1.0 / self.p)


class SparseVector:
    """Immutable finitely supported map ``coordinate -> scalar``.

    Coordinates are integers ``>= 1``; zero entries are never stored.
    """

    __slots__ = ("_data", "exact")

    def __init__(self, entries: Mapping[int, Scalar] | Iterable[tuple[int, Scalar]] = (), exact: bool = False):
        if isinstance(entries, Mapping):
            entries = entries.items()
        conv = Fraction if exact else float
        data = {}
        for j, v in entries:
            if j < 1:
                raise ValueError(f"coordinates start at 1, got {j}")
            if v:
                data[int(j)] = conv(v)
        self._data = data
        self.exact = exact

    @classmethod
    def _wrap(cls, data: dict, exact: bool) -> "SparseVector":
        out = cls.__new__(cls)
        out._data = data
        out.exact = exact
        return out

    @classmethod
    def unit(cls, j: int, exact: bool = False) -> "SparseVector":
        return cls({j: 1}, exact)

    def __getitem__(self, j: int) -> Scalar:
        return self._data.get(j, 0)

    def __len__(self):
        return len(self._data)

    def __bool__(self):
        return bool(self._data)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._data))

    def items(self) -> list[tuple[int, Scalar]]:
        return sorted(self._data.items())

    def as_dict(self) -> dict:
        return dict(self._data)

    @property
    def support(self) -> list[int]:
        return sorted(self._data)

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self._data == other._data

    def __repr__(self):
        body = ", ".join(f"{j}: {v}" for j, v in self.items()[:8])
        more = ", ..." if len(self) > 8 else ""
        return f"SparseVector({{{body}{more}}}, exact={self.exact})"

    def _combine(self, other: "SparseVector", sign: int) -> "SparseVector":
        data = dict(self._data)
        for j, v in other._data.items():
            s = data.get(j, 0) + sign * v
            if s:
                data[j] = s
            else:
                data.pop(j, None)
        return SparseVector._wrap(data, self.exact and other.exact)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return SparseVector._wrap({j: -v for j, v in self._data.items()}, self.exact)

    def scale(self, c) -> "SparseVector":
        if not c:
            return SparseVector._wrap({}, self.exact)
        if self.exact:
            c = Fraction(c)
        return SparseVector._wrap({j: c * v for j, v in self._data.items()}, self.exact)

    __mul__ = scale
    __rmul__ = scale

    def restrict(self, A: Iterable[int]) -> "SparseVector":
        A = set(A)
        return SparseVector._wrap({j: v for j, v in self._data.items() if j in A}, self.exact)

    def head(self, n: int) -> "SparseVector":
        """Projection ``S_n`` onto the first ``n`` coordinates."""
        return SparseVector._wrap({j: v for j, v in self._data.items() if j <= n}, self.exact)

    def pairing(self, other: "SparseVector") -> Scalar:
        a, b = self._data, other._data
        if len(a) > len(b):
            a, b = b, a
        total = 0
        for j, v in a.items():
            w = b.get(j)
            if w is not None:
                total += v * w
        return total

    def power_sum(self, ctx: PContext):
        """``sum |v(j)|**p``; an :class:`Enclosure` in exact mode."""
        if ctx.exact:
            # basis vectors repeat one value over whole blocks: sum distinct values once
            # keyed by (|numerator|, denominator): hashing int pairs is far cheaper than Fractions
            pairs = Counter((abs(v.numerator), v.denominator) for v in self._data.values())
            counts = {Fraction(n, d): c for (n, d), c in pairs.items()}
            if ctx.q == 1:
                return Enclosure.point(sum((a * c for a, c in counts.items()), Fraction(0)))
            lo = hi = Fraction(0)
            for a, c in counts.items():
                e = _iroot_bounds(a, ctx.q, ROOT_BITS)
                lo += c * e.lo
                hi += c * e.hi
            return Enclosure(lo, hi)
        p = ctx.p
        return math.fsum(abs(v) ** p for v in self._data.values())

    def p_norm(self, ctx: PContext) -> float:
        return ctx.root(self.power_sum(ctx))

    def norms(self, ctx: PContext):
        """``(power sum, norm)``."""
        s = self.power_sum(ctx)
        return s, ctx.root(s)

    def sup_norm(self) -> Scalar:
        return max((abs(v) for v in self._data.values()), default=0)

    def to_text(self) -> str:
        lines = []
        for j, v in self.items():
            if isinstance(v, Fraction):
                val = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
            else:
                val = repr(v)
            lines.append(f"{j} {val}\n")
        return "".join(lines)

    @classmethod
    def from_text(cls, text: str, exact: bool | None = None) -> "SparseVector":
        pairs = []
        saw_float = False
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            idx, val = line.split()
            if "/" in val or exact:
                pairs.append((int(idx), Fraction(val)))
            else:
                saw_float = saw_float or not val.lstrip("-").isdigit()
                pairs.append((int(idx), float(val) if saw_float and not exact else Fraction(val)))
        if exact is None:
            exact = not saw_float
        return cls(pairs, exact)


def pairing(u: SparseVector, v: SparseVector) -> Scalar:
    return u.pairing(v)
