"""Integer combinatorics behind the block-mixing basis construction.

A sequence ``delta = (d_1, d_2, ...)`` of integers ``>= 2`` defines

* ``sigma(k) = 2 + d_1 + ... + d_{k-1}`` (so ``sigma(1) = 2``),
* ``rho``, the left inverse of ``sigma``: ``rho(j) = k`` iff
  ``sigma(k) <= j < sigma(k+1)``,
* ``Lambda(n) = sigma^(n)(1)`` and its left inverse ``Gamma``,
* the level intervals ``J_n = [Lambda(n), Lambda(n+1))`` and the block
  intervals ``J_{k,n} = [sigma^(n)(k), sigma^(n)(k+1))``.

Everything is tabulated eagerly up to a caller supplied horizon; queries past
the horizon raise :class:`~lindy.errors.CapacityExceeded`.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityExceeded, ConfigError, DomainError

INDEX_LIMIT = 2**63 - 1
LIST_LIMIT = 1 << 22
TABLE_LIMIT = 1 << 26  # eager tables cost ~16 bytes per coordinate


@dataclass(frozen=True)
class DeltaSpec:
    """Rule generating ``d_n``.

    ``kind`` is one of ``"const"``, ``"list"``, ``"pow"``, ``"table"``.
    ``list`` and ``table`` repeat ``tail`` (default: the last value) past the
    explicit prefix.
    """

    kind: str
    value: float = 2
    values: tuple[int, ...] = ()
    tail: int | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind == "const":
            if int(self.value) != self.value or self.value < 2:
                raise ConfigError(f"const delta needs an integer >= 2, got {self.value}")
        elif self.kind in ("list", "table"):
            if not self.values:
                raise ConfigError(f"{self.kind} delta needs at least one value")
            bad = [v for v in self.values if v < 2]
            if bad or (self.tail is not None and self.tail < 2):
                raise ConfigError(f"every d_n must be >= 2 (got {bad or self.tail})")
        elif self.kind == "pow":
            if self.value < 0:
                raise ConfigError("pow exponent must be >= 0")
        else:
            raise ConfigError(f"unknown delta rule {self.kind!r}")

    @classmethod
    def constant(cls, c: int = 2) -> "DeltaSpec":
        return cls("const", value=c)

    @classmethod
    def explicit(cls, values: Iterable[int], tail: int | None = None) -> "DeltaSpec":
        return cls("list", values=tuple(int(v) for v in values), tail=tail)

    @classmethod
    def power(cls, a: float) -> "DeltaSpec":
        return cls("pow", value=a)

    @classmethod
    def table(cls, values: Iterable[int], label: str = "") -> "DeltaSpec":
        return cls("table", values=tuple(int(v) for v in values), label=label)

    def term(self, n: int) -> int:
        if n < 1:
            raise DomainError("delta is indexed from 1")
        if self.kind == "const":
            return int(self.value)
        if self.kind == "pow":
            # max(2, .) keeps d_1 = ceil(1^a) = 1 legal
            return max(2, math.ceil(n**self.value - 1e-12))
        if n <= len(self.values):
            return self.values[n - 1]
        return self.tail if self.tail is not None else self.values[-1]

    def terms(self, count: int) -> np.ndarray:
        """``d_1 .. d_count`` as an int64 array."""
        if self.kind == "const":
            return np.full(count, int(self.value), dtype=np.int64)
        if self.kind == "pow":
            n = np.arange(1, count + 1, dtype=np.float64)
            d = np.ceil(n**self.value - 1e-12).astype(np.int64)
            return np.maximum(d, 2)
        head = np.asarray(self.values[:count], dtype=np.int64)
        if count <= len(self.values):
            return head
        fill = self.tail if self.tail is not None else self.values[-1]
        return np.concatenate([head, np.full(count - len(self.values), fill, dtype=np.int64)])

    @property
    def nondecreasing(self) -> bool:
        if self.kind in ("const", "pow"):
            return True
        vals = list(self.values)
        if self.tail is not None:
            vals.append(self.tail)
        return all(a <= b for a, b in zip(vals, vals[1:]))

    def to_text(self) -> str:
        if self.kind == "const":
            return f"const:{int(self.value)}"
        if self.kind == "pow":
            return f"pow:{self.value:g}"
        if self.kind == "list":
            body = "list:" + ",".join(map(str, self.values))
            return body + (f";tail={self.tail}" if self.tail is not None else "")
        return f"table:{self.label or '<inline>'}"


def parse_delta(text: str) -> DeltaSpec:
    """Parse ``const:<c> | list:<c1,c2,...>[;tail=<c>] | pow:<a> | table:<file>``."""
    kind, sep, body = text.strip().partition(":")
    if not sep or not body:
        raise ConfigError(f"malformed delta spec {text!r}")
    try:
        if kind == "const":
            return DeltaSpec.constant(int(body))
        if kind == "pow":
            return DeltaSpec.power(float(body))
        if kind == "list":
            head, _, tail = body.partition(";")
            tail_val = None
            if tail:
                key, _, v = tail.partition("=")
                if key.strip() != "tail":
                    raise ConfigError(f"unknown list option {tail!r}")
                tail_val = int(v)
            return DeltaSpec.explicit([int(v) for v in head.split(",") if v.strip()], tail_val)
        if kind == "table":
            return read_delta_table(body)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed delta spec {text!r}: {exc}") from exc
    raise ConfigError(f"unknown delta rule {kind!r}")


def read_delta_table(path: str | Path) -> DeltaSpec:
    lines = Path(path).read_text().split()
    return DeltaSpec.table([int(x) for x in lines], label=str(path))


def write_delta_table(delta: Sequence[int], path: str | Path) -> None:
    Path(path).write_text("".join(f"{int(d)}\n" for d in delta))


class IndexTables:
    """Eager tables of ``d``, ``sigma`` and ``Lambda`` up to ``max_index``.

    Coordinates ``1 .. max_index`` are supported: ``rho`` and ``gamma`` answer
    for them and ``sigma`` answers for ``1 .. max_index + 1``.  Instances are
    never mutated after construction.
    """

    def __init__(self, delta: DeltaSpec, max_index: int):
        if max_index < 1:
            raise DomainError("max_index must be positive")
        if max_index > TABLE_LIMIT:
            raise CapacityExceeded(f"tables up to {max_index} exceed the limit {TABLE_LIMIT}")
        d_arr = delta.terms(max_index + 1)
        if int(d_arr.max()) * (max_index + 1) > INDEX_LIMIT:
            raise CapacityExceeded("sigma table would overflow the 64-bit index type")
        sigma_arr = np.empty(max_index + 2, dtype=np.int64)
        sigma_arr[0] = 0  # unused slot so that sigma_arr[k] = sigma(k)
        sigma_arr[1] = 2
        np.cumsum(d_arr[:max_index], out=sigma_arr[2:])
        sigma_arr[2:] += 2
        if max_index <= LIST_LIMIT:
            d = [0] + d_arr.tolist()
            sigma = sigma_arr.tolist()
        else:
            # python lists of this size cost ~40 bytes per entry; stay in numpy
            d = np.concatenate([[0], d_arr])
            sigma = sigma_arr
        lam = [1]
        while lam[-1] <= max_index + 1:
            lam.append(int(sigma[lam[-1]]))
        self.delta = delta
        self.max_index = max_index
        self.d = d
        self.sigma_cache = sigma
        self.lambda_cache = lam
        self.d_array = d_arr
        self.sigma_array = sigma_arr

    def __repr__(self):
        return f"IndexTables({self.delta.to_text()}, max_index={self.max_index})"

    @classmethod
    def covering(cls, delta: DeltaSpec, n_basis: int) -> "IndexTables":
        """Tables large enough to hold the supports of ``x_1 .. x_{n_basis}``."""
        if n_basis > TABLE_LIMIT:
            raise CapacityExceeded(f"{n_basis} basis vectors exceed the table limit {TABLE_LIMIT}")
        d = delta.terms(n_basis)
        top = 2 + int(d.sum())  # sigma(n_basis + 1)
        return cls(delta, max(top - 1, n_basis, 2))

    @property
    def max_level(self) -> int:
        """Largest ``n`` with ``Lambda(n) <= max_index``."""
        return bisect.bisect_right(self.lambda_cache, self.max_index) - 1

    @property
    def basis_horizon(self) -> int:
        """Largest ``k`` whose block ``[sigma(k), sigma(k+1))`` lies inside the tables."""
        return int(np.searchsorted(self.sigma_array[1:], self.max_index + 1, side="right")) - 1

    @property
    def gamma_horizon(self) -> int:
        """Largest ``m`` for which ``Gamma(m)`` is determined by the tables."""
        return self.lambda_cache[-1] - 1

    def _check_coord(self, j: int) -> None:
        if j > self.max_index:
            raise CapacityExceeded(f"index {j} beyond table horizon {self.max_index}")

    def dn(self, k: int) -> int:
        if k < 1:
            raise DomainError("delta is indexed from 1")
        self._check_coord(k)
        return int(self.d[k])

    def sigma(self, k: int) -> int:
        if k < 1:
            raise DomainError("sigma is defined for k >= 1")
        if k > self.max_index + 1:
            raise CapacityExceeded(f"sigma({k}) beyond table horizon")
        return int(self.sigma_cache[k])

    def rho(self, j: int) -> int:
        if j < 2:
            raise DomainError(f"rho is defined for j >= 2, got {j}")
        self._check_coord(j)
        if isinstance(self.sigma_cache, list):
            return bisect.bisect_right(self.sigma_cache, j, lo=1) - 1
        return int(np.searchsorted(self.sigma_array[1:], j, side="right"))

    def rho_array(self, js: np.ndarray) -> np.ndarray:
        js = np.asarray(js)
        if js.size and (js.min() < 2 or js.max() > self.max_index):
            raise CapacityExceeded("rho_array argument outside [2, max_index]")
        return np.searchsorted(self.sigma_array[1:], js, side="right").astype(np.int64)

    def lambda_cap(self, n: int) -> int:
        if n < 0:
            raise DomainError("levels start at 0")
        if n >= len(self.lambda_cache):
            raise CapacityExceeded(f"Lambda({n}) beyond table horizon")
        return self.lambda_cache[n]

    def gamma(self, m: int) -> int:
        if m < 1:
            raise DomainError("Gamma is defined for m >= 1")
        if m > self.gamma_horizon:
            raise CapacityExceeded(f"Gamma({m}) beyond table horizon")
        return bisect.bisect_right(self.lambda_cache, m) - 1

    def gamma_array(self, ms) -> np.ndarray:
        ms = np.asarray(ms, dtype=np.int64)
        if ms.size and (ms.min() < 1 or ms.max() > self.gamma_horizon):
            raise CapacityExceeded("gamma_array argument outside [1, gamma_horizon]")
        lam = np.asarray(self.lambda_cache, dtype=np.int64)
        return np.searchsorted(lam, ms, side="right") - 1

    def sigma_iter(self, k: int, n: int) -> int:
        for _ in range(n):
            k = self.sigma(k)
        return k

    def block_interval(self, k: int, n: int) -> tuple[int, int]:
        """Half-open ``J_{k,n} = [sigma^(n)(k), sigma^(n)(k+1))``."""
        if k < 1 or n < 0:
            raise DomainError("block_interval needs k >= 1, n >= 0")
        return self.sigma_iter(k, n), self.sigma_iter(k + 1, n)

    def level_interval(self, n: int) -> tuple[int, int]:
        return self.lambda_cap(n), self.lambda_cap(n + 1)

    def sigma_set(self, A: Iterable[int]) -> list[int]:
        out: list[int] = []
        for k in sorted(set(A)):
            out.extend(range(self.sigma(k), self.sigma(k + 1)))
        return out

    def rho_orbit(self, j: int) -> list[int]:
        """``[j, rho(j), rho(rho(j)), ..., 1]``."""
        self._check_coord(j)
        orbit = [j]
        while j > 1:
            j = self.rho(j)
            orbit.append(j)
        return orbit
