"""The basis ``x_k``, its biorthogonal functionals ``x_j*`` and the maps between
coefficient space and sequence space.

With ``w_k = d_k**(-1/p)``:

* ``x_k = e_k - w_k * sum(e_j for j in [sigma(k), sigma(k+1)))``
* ``x_j* = e_j + w_{rho(j)} x*_{rho(j)}`` (so ``x_1* = e_1``)
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import CapacityExceeded, DomainError
from .indexing import DeltaSpec, IndexTables
from .sparse import PContext, Scalar, SparseVector


class CoefficientVector(SparseVector):
    """Finitely supported coefficients ``(a_k)`` relative to the basis."""

    __slots__ = ()

    @classmethod
    def _wrap(cls, data, exact):
        out = CoefficientVector.__new__(CoefficientVector)
        out._data = data
        out.exact = exact
        return out

    def __repr__(self):
        return "CoefficientVector" + super().__repr__()[len("SparseVector"):]


def as_coefficients(v: SparseVector) -> CoefficientVector:
    return CoefficientVector._wrap(v.as_dict(), v.exact)


class BasisContext:
    """Index tables plus the weights ``w_k = d_k**(-1/p)`` in the chosen mode."""

    def __init__(self, tables: IndexTables, ctx: PContext):
        self.tables = tables
        self.ctx = ctx
        self.exact = ctx.exact
        self._wd: dict[int, Scalar] = {}
        d = np.concatenate([[2], tables.d_array[: tables.max_index]]).astype(np.float64)
        self.w_array = d ** (-1.0 / ctx.p)  # w_array[k] = w_k; slot 0 unused

    @classmethod
    def build(cls, delta: DeltaSpec | str, p: float, n_basis: int, exact: bool = False) -> "BasisContext":
        """Context whose tables hold the full supports of ``x_1 .. x_{n_basis}``."""
        from .indexing import parse_delta

        if isinstance(delta, str):
            delta = parse_delta(delta)
        return cls(IndexTables.covering(delta, n_basis), PContext(p, exact))

    def __repr__(self):
        return f"BasisContext({self.tables!r}, p={self.ctx.p}, exact={self.exact})"

    @property
    def p(self) -> float:
        return self.ctx.p

    @property
    def horizon(self) -> int:
        """Largest basis index whose support fits in the tables."""
        return self.tables.basis_horizon

    def w(self, k: int) -> Scalar:
        d = self.tables.dn(k)
        val = self._wd.get(d)
        if val is None:
            val = self._wd[d] = self.ctx.weight(d)
        return val

    def block(self, k: int) -> range:
        return range(self.tables.sigma(k), self.tables.sigma(k + 1))

    def _check_basis(self, k: int) -> None:
        if k < 1:
            raise DomainError("basis indices start at 1")
        if k > self.horizon:
            raise CapacityExceeded(f"x_{k} does not fit in the tables (horizon {self.horizon})")

    def scalar(self, x) -> Scalar:
        return self.ctx.scalar(x)


def basis_vector(bctx: BasisContext, k: int) -> SparseVector:
    bctx._check_basis(k)
    w = bctx.w(k)
    data = {k: bctx.scalar(1)}
    for j in bctx.block(k):
        data[j] = -w
    return SparseVector._wrap(data, bctx.exact)


def dual_vector(bctx: BasisContext, j: int) -> SparseVector:
    if j < 1:
        raise DomainError("dual indices start at 1")
    t = bctx.tables
    val = bctx.scalar(1)
    data = {j: val}
    while j > 1:
        r = t.rho(j)
        val = val * bctx.w(r)
        data[r] = val
        j = r
    return SparseVector._wrap(data, bctx.exact)


def synthesize(bctx: BasisContext, a: SparseVector | Mapping[int, Scalar]) -> SparseVector:
    """``sum a_k x_k`` as a sequence."""
    if not isinstance(a, SparseVector):
        a = SparseVector(a, bctx.exact)
    data: dict[int, Scalar] = {}
    for k, ak in a.items():
        bctx._check_basis(k)
        data[k] = data.get(k, 0) + ak
        c = -ak * bctx.w(k)
        for j in bctx.block(k):
            data[j] = data.get(j, 0) + c
    data = {j: v for j, v in data.items() if v}
    return SparseVector._wrap(data, bctx.exact and a.exact)


def analyze(bctx: BasisContext, v: SparseVector, up_to: int) -> CoefficientVector:
    """``(<x_j*, v>)_{j <= up_to}`` via ``c_j = v(j) + w_{rho(j)} c_{rho(j)}``."""
    if up_to < 1 or not v:
        return CoefficientVector._wrap({}, v.exact)
    t = bctx.tables
    if up_to > t.max_index:
        raise CapacityExceeded(f"analyze up_to={up_to} beyond table horizon")
    if not bctx.exact or not v.exact:
        return _analyze_float(bctx, v, up_to)
    c = [Fraction(0)] * (up_to + 1)
    c[1] = v[1]
    for k in range(1, up_to + 1):
        lo, hi = t.sigma(k), t.sigma(k + 1)
        if lo > up_to:
            break
        ck = c[k]
        wc = ck * bctx.w(k) if ck else 0
        for j in range(lo, min(hi, up_to + 1)):
            c[j] = v[j] + wc
    data = {j: c[j] for j in range(1, up_to + 1) if c[j]}
    return CoefficientVector._wrap(data, True)


def _analyze_float(bctx: BasisContext, v: SparseVector, up_to: int) -> CoefficientVector:
    t = bctx.tables
    dense = np.zeros(up_to + 1)
    for j, x in v.items():
        if j <= up_to:
            dense[j] = float(x)
    c = np.zeros(up_to + 1)
    c[1] = dense[1]
    n = 1
    while t.lambda_cap(n) <= up_to:
        lo, hi = t.lambda_cap(n), min(t.lambda_cap(n + 1), up_to + 1)
        js = np.arange(lo, hi)
        r = t.rho_array(js)
        c[js] = dense[js] + bctx.w_array[r] * c[r]
        n += 1
    nz = np.nonzero(c)[0]
    return CoefficientVector._wrap({int(j): float(c[j]) for j in nz}, False)


def coefficient_formula(bctx: BasisContext, a: SparseVector, j: int) -> Scalar:
    """Coordinate ``j`` of ``sum a_k x_k``: ``a_j - a_{rho(j)} w_{rho(j)}``."""
    if j == 1:
        return a[1]
    r = bctx.tables.rho(j)
    return a[j] - a[r] * bctx.w(r)


def orthogonalized_section(bctx: BasisContext, n: int) -> list[SparseVector]:
    """``[x_{1,n}, ..., x_{n,n}]`` from ``x_{k,m+1} = x_{k,m} - x_{k,m}(m+1) x_{m+1}``."""
    if n < 1:
        raise DomainError("section dimension must be positive")
    bctx._check_basis(n)
    section = [basis_vector(bctx, 1)]
    for m in range(1, n):
        nxt = basis_vector(bctx, m + 1)
        section = [xk - nxt.scale(xk[m + 1]) if xk[m + 1] else xk for xk in section]
        section.append(nxt)
    return section


def head_unit_witness(bctx: BasisContext, j: int, N: int) -> SparseVector:
    """Element of ``span(x_1..x_N)`` with ``S_N x = e_j`` and ``||x||^p = 2``.

    Start from ``x_j`` and clear coordinates ``j+1 .. N`` one at a time with
    ``x <- x - x(k) x_k``; each step only touches ``{k} u block(k)``.
    """
    if not 1 <= j <= N:
        raise DomainError("need 1 <= j <= N")
    bctx._check_basis(N)
    data = basis_vector(bctx, j).as_dict()
    for k in range(j + 1, N + 1):
        c = data.pop(k, 0)
        if c:
            cw = c * bctx.w(k)
            for i in bctx.block(k):
                s = data.get(i, 0) + cw
                if s:
                    data[i] = s
                else:
                    data.pop(i, None)
    return SparseVector._wrap(data, bctx.exact)


def section_embed(bctx: BasisContext, a: SparseVector, N: int) -> SparseVector:
    """``sum_{k<=N} a_k x_{k,N}``: the element of ``span(x_1..x_N)`` with ``S_N y = a``."""
    if a and max(a.support) > N:
        raise DomainError("coefficients must be supported in [1, N]")
    coeffs = analyze(bctx, SparseVector._wrap(a.as_dict(), a.exact), N)
    return synthesize(bctx, coeffs)


class Embedding:
    """Isometric copy of ``l_p`` spanned by disjointly supported basis vectors.

    ``n_1 = Lambda(1) = 2`` and ``n_{k+1}`` is the least index beyond ``n_k``
    outside every support ``{n_i} u block(n_i)`` chosen so far.  The supports
    are then pairwise disjoint, so ``J(x) = 2^{-1/p} sum x(k) x_{n_k}`` is an
    isometry and ``P(y)(k) = 2^{1/p} <x*_{n_k}, y restricted to supp x_{n_k}>``
    is a left inverse of norm at most ``2^{1/p}``.
    """

    def __init__(self, bctx: BasisContext):
        self.bctx = bctx
        self._seq: list[int] = []
        self._used: set[int] = set()

    def index(self, k: int) -> int:
        """``n_k``."""
        while len(self._seq) < k:
            n = self._seq[-1] + 1 if self._seq else self.bctx.tables.lambda_cap(1)
            while n in self._used:
                n += 1
            self.bctx._check_basis(n)
            self._seq.append(n)
            self._used.add(n)
            self._used.update(self.bctx.block(n))
        return self._seq[k - 1]

    def embed(self, x: SparseVector) -> SparseVector:
        bctx = self.bctx
        s = 1 / bctx.ctx.two_root
        coeffs = {self.index(k): v * s for k, v in x.items()}
        return synthesize(bctx, SparseVector._wrap(coeffs, x.exact and bctx.exact))

    def project(self, y: SparseVector, K: int) -> SparseVector:
        """``P(y)`` on the first ``K`` embedded coordinates."""
        bctx = self.bctx
        s = bctx.ctx.two_root
        out = {}
        for k in range(1, K + 1):
            n = self.index(k)
            support = [n, *bctx.block(n)]
            val = dual_vector(bctx, n).pairing(y.restrict(support))
            if val:
                out[k] = s * val
        return SparseVector._wrap(out, y.exact and bctx.exact)


def embed_and_project(bctx: BasisContext, x: SparseVector) -> tuple[SparseVector, SparseVector]:
    emb = Embedding(bctx)
    jx = emb.embed(x)
    K = max(x.support, default=0)
    return jx, emb.project(jx, K)


def synth_arrays(bctx: BasisContext, idx: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Float ``sum vals[i] x_{idx[i]}`` as ``(coordinates, values)`` arrays."""
    idx = np.asarray(idx, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if idx.size == 0:
        return idx, vals
    if idx.max() > bctx.horizon or idx.min() < 1:
        raise CapacityExceeded("coefficient index outside the basis horizon")
    coords, owner = block_coordinates(bctx.tables, idx)
    allc = np.concatenate([idx, coords])
    allv = np.concatenate([vals, -(vals * bctx.w_array[idx])[owner]])
    uc, inv = np.unique(allc, return_inverse=True)
    out = np.zeros(uc.size)
    np.add.at(out, inv, allv)
    return uc, out


def block_coordinates(tables: IndexTables, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Concatenated blocks ``[sigma(k), sigma(k+1))`` for ``k`` in ``idx`` and the owner position of each."""
    starts = tables.sigma_array[idx]
    sizes = tables.sigma_array[idx + 1] - starts
    owner = np.repeat(np.arange(idx.size), sizes)
    offs = np.arange(owner.size) - np.repeat(np.cumsum(sizes) - sizes, sizes)
    return starts[owner] + offs, owner


def biorthogonality_defects(bctx: BasisContext, N: int) -> list[tuple[int, int, Scalar]]:
    """All ``(j, k, <x_j*, x_k>)`` with ``j, k <= N`` that differ from ``delta_jk``.

    The pairing matrix is assembled from the materialized vectors through a
    coordinate -> [(k, x_k(i))] index, so every nonzero pairing is visited.
    """
    column: dict[int, list[tuple[int, Scalar]]] = {}
    for k in range(1, N + 1):
        for i, v in basis_vector(bctx, k).items():
            column.setdefault(i, []).append((k, v))
    bad = []
    for j in range(1, N + 1):
        row: dict[int, Scalar] = {}
        for i, u in dual_vector(bctx, j).items():
            for k, v in column.get(i, ()):
                row[k] = row.get(k, 0) + u * v
        for k, val in row.items():
            if val != (1 if k == j else 0):
                bad.append((j, k, val))
        if row.get(j, 0) != 1:
            if j not in row:
                bad.append((j, j, 0))
    return bad
