"""Delta sequences with prescribed level growth.

Two entry points:

* :func:`delta_from_milestones` turns admissible milestones ``M_0 < M_1 < ...``
  into a nondecreasing delta whose ``Lambda(n)`` equals ``M_n``.
* :func:`delta_from_concave` picks milestones from ``M(x) = floor(exp(psi(x)))``
  with ``psi`` the inverse of a concave ``phi``, so that ``Gamma(m)`` tracks
  ``phi(log m)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import ConfigError, InvalidMilestones, SearchFailure
from .indexing import INDEX_LIMIT, DeltaSpec

A_MAX = 64
MAX_TERMS = 1 << 24
PSI_TOL = 1e-12


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def validate_milestones(M: Sequence[int]) -> tuple[bool, int | None]:
    """Check admissibility; returns ``(ok, first violating n)``.

    The violation index is the ``n`` of the failing ratio inequality, or the
    position of the first bad value for the start conditions.
    """
    M = [int(v) for v in M]
    if len(M) < 3:
        raise ConfigError("need at least three milestones")
    if M[0] != 1:
        return False, 0
    if M[1] != 2:
        return False, 1
    if M[2] < 4:
        return False, 2
    for n in range(1, len(M)):
        if M[n] <= M[n - 1]:
            return False, n
    for n in range(1, len(M) - 2):
        lhs = _ceil_div(M[n + 1] - M[n], M[n] - M[n - 1])
        rhs = (M[n + 2] - M[n + 1]) // (M[n + 1] - M[n])
        if lhs > rhs:
            return False, n
    return True, None


def milestone_sigma(M: Sequence[int]) -> list[int]:
    """``sigma(t)`` for ``t = 1 .. M[-2]`` from the piecewise linear ``h``.

    On ``[M_{n-1}, M_n]`` the map is ``max(f_n, g_n)`` with
    ``f_n(t) = M_n + floor(A_n)(t - M_{n-1})`` and
    ``g_n(t) = M_{n+1} - ceil(A_n)(M_n - t)``.
    """
    out = [0]  # out[t] = h(t); slot 0 unused
    for n in range(1, len(M) - 1):
        lo_t, hi_t = M[n - 1], M[n]
        num, den = M[n + 1] - M[n], M[n] - M[n - 1]
        a_floor, a_ceil = num // den, _ceil_div(num, den)
        start = lo_t if n == 1 else lo_t + 1
        for t in range(start, hi_t + 1):
            out.append(max(M[n] + a_floor * (t - lo_t), M[n + 1] - a_ceil * (hi_t - t)))
    return out


def delta_from_milestones(M: Sequence[int]) -> DeltaSpec:
    """Nondecreasing delta with ``Lambda(n) = M_n`` for ``n <= len(M) - 1``."""
    M = [int(v) for v in M]
    ok, bad = validate_milestones(M)
    if not ok:
        raise InvalidMilestones(f"milestones violate admissibility at n={bad}")
    h = milestone_sigma(M)
    delta = tuple(h[t + 1] - h[t] for t in range(1, len(h) - 1))
    # past M_{L-1} the last slope is repeated, which keeps delta nondecreasing
    return DeltaSpec("table", values=delta, tail=delta[-1], label=f"milestones[{len(M)}]")


@dataclass(frozen=True)
class ConcaveSpec:
    """Concave growth profile ``phi``: ``power`` (``x**c``) or ``log1p``."""

    family: str
    c: float = 1.0
    target_length: int = 8

    def __post_init__(self):
        if self.family not in ("power", "log1p"):
            raise ConfigError(f"unknown concave family {self.family!r}")
        if self.family == "power" and not 0 < self.c <= 1:
            raise ConfigError("power family needs 0 < c <= 1")
        if self.target_length < 3:
            raise ConfigError("target_length must be at least 3")

    @classmethod
    def parse(cls, text: str, length: int) -> "ConcaveSpec":
        kind, _, arg = text.strip().partition(":")
        if kind in ("pow", "power"):
            try:
                c = float(eval_fraction(arg))
            except ValueError as exc:
                raise ConfigError(f"bad exponent in {text!r}") from exc
            return cls("power", c, length)
        if kind == "log1p":
            return cls("log1p", 1.0, length)
        raise ConfigError(f"unknown phi {text!r}")

    def phi(self, x: float) -> float:
        if self.family == "power":
            return x**self.c
        return math.log1p(x)

    @property
    def label(self) -> str:
        return f"power({self.c:g})" if self.family == "power" else "log1p"


def eval_fraction(text: str) -> float:
    num, sep, den = text.partition("/")
    return float(num) / float(den) if sep else float(num)


def invert_increasing(f: Callable[[float], float], y: float, tol: float = PSI_TOL) -> float:
    """Solve ``f(x) = y`` for increasing ``f`` with ``f(0) = 0`` by bisection."""
    if y <= 0:
        return 0.0
    lo, hi = 0.0, 1.0
    while f(hi) < y:
        lo, hi = hi, hi * 2
        if hi > 1e300:
            raise SearchFailure("bracket for the inverse diverged")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if f(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class ConcaveResult:
    delta: DeltaSpec
    milestones: list[int]
    a: int
    b: int
    requested_length: int
    truncated: bool
    checked_range: tuple[int, int]
    notes: list[str] = field(default_factory=list)

    def diagnostics(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "milestones": self.milestones,
            "requested_length": self.requested_length,
            "length": len(self.milestones) - 1,
            "truncated": self.truncated,
            "checked_range": list(self.checked_range),
            "delta_terms": len(self.delta.values),
            "tail": self.delta.tail,
            "notes": self.notes,
        }


def _M_factory(spec: ConcaveSpec):
    cache: dict[int, int | None] = {}

    def M(x: int) -> int | None:
        """``floor(exp(psi(x)))``, or ``None`` past the index range."""
        if x not in cache:
            psi = invert_increasing(spec.phi, float(x))
            if psi > 43.6:  # exp(psi) would exceed the 64-bit index range
                cache[x] = None
            else:
                cache[x] = math.floor(math.exp(psi))
        return cache[x]

    return M


def delta_from_concave(spec: ConcaveSpec, a_max: int = A_MAX, max_terms: int = MAX_TERMS) -> ConcaveResult:
    """Milestones ``2^n`` up to ``b`` followed by shifted values of ``M(x)``."""
    L = spec.target_length
    if spec.family == "power" and spec.c == 1:
        # phi(x) = x is the doubling regime: delta = 2 everywhere, Lambda(n) = 2^n
        milestones = [2**n for n in range(L + 1)]
        delta = DeltaSpec("table", values=(2,), tail=2, label="power(1)")
        return ConcaveResult(delta, milestones, 0, L, L, False, (0, 0), ["classical doubling case"])
    M = _M_factory(spec)
    a = 0
    while True:
        if a > a_max:
            raise SearchFailure(f"no a <= {a_max} passes the eligibility check (last range [{a}, {a + L}])")
        if M(a + 1) is None:
            raise SearchFailure(f"M({a + 1}) leaves the index range before an eligible a was found")
        gap = M(a + 1) - M(a)
        if gap >= 2:
            b = gap.bit_length() - 1
            hi_x = max(a, L - b + a - 3)
            if all(_eligible(M, x) for x in range(a, hi_x + 1)):
                break
        a += 1
    milestones = []
    truncated = False
    notes = []
    for n in range(L + 1):
        val = 2**n if n <= b else M(n - b + a)
        if val is not None and n > b:
            val = val - M(a) + 2**b
        if val is None or val > INDEX_LIMIT:
            truncated = True
            notes.append(f"M_{n} exceeds the 64-bit index range")
            break
        if n >= 2 and milestones[-1] > max_terms:
            truncated = True
            notes.append(f"M_{n - 1}={milestones[-1]} needs more than {max_terms} delta terms")
            break
        milestones.append(val)
    if truncated:
        warnings.warn(f"{spec.label}: truncated to {len(milestones) - 1} levels ({notes[-1]})", stacklevel=2)
    delta = delta_from_milestones(milestones)
    delta = DeltaSpec("table", values=delta.values, tail=delta.tail, label=spec.label)
    return ConcaveResult(delta, milestones, a, b, L, truncated, (a, hi_x), notes)


def _eligible(M, x: int) -> bool:
    """The ratio condition at ``x``; points past the index range are never used."""
    if M(x + 3) is None:
        return True
    d0 = M(x + 1) - M(x)
    d1 = M(x + 2) - M(x + 1)
    d2 = M(x + 3) - M(x + 2)
    if d0 <= 0 or d1 <= 0:
        return False
    return 5 <= _ceil_div(d1, d0) <= d2 // d1
