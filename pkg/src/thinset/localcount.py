"""Exhaustive local data over F_p^n: root-count tables, point counts,
zero-set censuses and box counts.

Tables are flat arrays of length p^n indexed by sum_i x_i p^(i-1), so x1
varies fastest.  Reshaped in C order the array has shape (p,) * n with the
last axis running over x1.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from thinset import io
from thinset.errors import TableTooLarge, ZeroModP
from thinset.polyring import Polynomial, reduce_mod, to_text
from thinset.primefield import count_roots

# above this p the per-row gcd method beats scanning every y
_SCAN_MAX_P = 4096
_ROW_BLOCK = 1 << 22


def eval_box(P: Polynomial, p: int, axes: Sequence[np.ndarray]) -> np.ndarray:
    """Values of an X-only polynomial mod p on the product of per-axis values.

    axes[i] holds the residues taken by X_(i+1); the result has shape
    (len(axes[n-1]), ..., len(axes[0])) so that x1 is the last axis.
    Y-exponents are ignored (callers pass Y-free polynomials).
    """
    n = len(axes)
    shape = tuple(len(a) for a in reversed(axes))
    out = np.zeros(shape, dtype=np.int64)
    if P.is_zero():
        return out
    cache: dict[tuple[int, int], np.ndarray] = {}

    def power(i, e):
        key = (i, e)
        if key not in cache:
            base = np.asarray(axes[i], dtype=np.int64) % p
            r = np.ones_like(base)
            b, k = base, e
            while k:
                if k & 1:
                    r = r * b % p
                b = b * b % p
                k >>= 1
            view = [1] * n
            view[n - 1 - i] = len(base)
            cache[key] = r.reshape(view)
        return cache[key]

    for exp, c in P.items():
        t = np.full((1,) * n, c % p, dtype=np.int64)
        for i in range(n):
            if exp[i + 1]:
                t = t * power(i, exp[i + 1]) % p
        out = (out + t) % p
    return out


def grid_values(P: Polynomial, p: int, n: int | None = None) -> np.ndarray:
    """Flat table of P(x) mod p over F_p^n in linear-index order."""
    n = P.nvars if n is None else n
    axes = [np.arange(p)] * n
    return eval_box(P, p, axes).reshape(-1)


def _root_counts(rows: np.ndarray, p: int) -> np.ndarray:
    """Distinct-root counts over F_p of each coefficient row (low degree first).

    An all-zero row means every y is a root and counts p.
    """
    k, width = rows.shape
    out = np.empty(k, dtype=np.int64)
    zero = ~rows.any(axis=1)
    out[zero] = p
    live = np.flatnonzero(~zero)
    if p <= _SCAN_MAX_P:
        ys = np.arange(p, dtype=np.int64)
        step = max(1, _ROW_BLOCK // p)
        for s in range(0, len(live), step):
            idx = live[s:s + step]
            R = rows[idx]
            val = np.repeat(R[:, -1:], p, axis=1)
            for c in range(width - 2, -1, -1):
                val = (val * ys + R[:, c:c + 1]) % p
            out[idx] = (val == 0).sum(axis=1)
    else:
        for i in live:
            out[i] = count_roots(rows[i].tolist(), p)
    return out


@dataclass(frozen=True, eq=False)
class VTable:
    """v_p(x) = #{y mod p : F(y, x) = 0 mod p} for every x in F_p^n."""

    p: int
    n: int
    data: np.ndarray
    poly: Polynomial

    @property
    def degY(self) -> int:
        return self.poly.degree(0)

    def grid(self) -> np.ndarray:
        return self.data.reshape((self.p,) * self.n)

    def at(self, x: Sequence[int]) -> int:
        idx = 0
        for i, xi in enumerate(x):
            idx += (xi % self.p) * self.p**i
        return int(self.data[idx])

    def total(self) -> int:
        return int(self.data.sum(dtype=np.int64))

    def export(self, path) -> dict:
        width = 1 if int(self.data.max(initial=0)) < 256 else 4
        dtype = "<u1" if width == 1 else "<u4"
        raw = self.data.astype(dtype).tobytes()
        meta = {
            "schema": io.SCHEMA,
            "kind": "vtable",
            "p": self.p,
            "n": self.n,
            "degY": self.degY,
            "dtype": dtype,
            "polynomial": to_text(self.poly),
        }
        return io.write_raw_table(path, raw, meta)


def v_table(F: Polynomial, p: int, cap: int | None = None) -> VTable:
    n = F.nvars
    size = p**n
    if size > io.table_cap(cap):
        raise TableTooLarge(f"p^n = {size} exceeds the table cap {io.table_cap(cap)}")
    coeffs = F.coeffs_in(0)
    width = len(coeffs)
    data = np.empty(size, dtype=np.int64)
    if width == 0:
        data[:] = p
        return VTable(p, n, data, F)
    cache: dict[bytes, int] = {}
    # slabs along the slowest coordinate keep memory bounded
    inner = p ** (n - 1) if n else 1
    step = max(1, _ROW_BLOCK // inner)
    stop = p if n else 1
    for s in range(0, stop, step):
        axes = [np.arange(p)] * n
        if n:
            axes[n - 1] = np.arange(s, min(s + step, p))
        lo, hi = s * inner, min(s + step, stop) * inner
        C = np.stack([eval_box(c, p, axes).reshape(-1) for c in coeffs], axis=1)
        uniq, inv = np.unique(C, axis=0, return_inverse=True)
        counts = np.empty(len(uniq), dtype=np.int64)
        todo = []
        for i, row in enumerate(uniq):
            key = row.tobytes()
            if key in cache:
                counts[i] = cache[key]
            else:
                todo.append(i)
        if todo:
            fresh = _root_counts(uniq[todo], p)
            for i, v in zip(todo, fresh):
                counts[i] = v
                cache[uniq[i].tobytes()] = int(v)
        data[lo:hi] = counts[inv.reshape(-1)]
    data.setflags(write=False)
    return VTable(p, n, data, F)


def point_count(F: Polynomial, p: int, cap: int | None = None) -> tuple[int, float]:
    """(#{F = 0} in F_p^(n+1), (count - p^n) / p^(n - 1/2))."""
    vt = v_table(F, p, cap)
    count = vt.total()
    n = F.nvars
    return count, (count - p**n) / p ** (n - 0.5)


@dataclass
class CensusReport:
    description: str
    count: int
    bound: float
    passed: bool = field(init=False)
    ratio: float = field(init=False)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = self.count <= self.bound
        self.ratio = self.count / self.bound if self.bound else (0.0 if self.count == 0 else float("inf"))

    def to_dict(self) -> dict:
        return asdict(self)


def zero_census(g: Polynomial, p: int, S: tuple[int, int] | None = None) -> CensusReport:
    """Count zeros of g in S^n (S an interval [lo, hi) of residues) against
    deg(g) |S|^(n-1)."""
    red = reduce_mod(g, p)
    if red.is_zero():
        raise ZeroModP(f"g vanishes identically mod {p}")
    n = g.nvars
    lo, hi = S if S is not None else (0, p)
    axis = np.arange(lo, hi)
    vals = eval_box(red.poly, p, [axis] * n)
    count = int((vals == 0).sum())
    deg = red.poly.total_degree()
    size = len(axis)
    return CensusReport(
        description=f"zeros of {to_text(g)} mod {p} in [{lo},{hi})^{n}",
        count=count,
        bound=deg * size ** (n - 1),
        details={"p": p, "n": n, "degree": deg, "S": [lo, hi]},
    )


def box_count(
    polys: Sequence[Polynomial],
    p: int,
    h: int,
    codim: int | None = None,
    dsum: int | None = None,
) -> CensusReport:
    """Common zeros of polys in [0, h)^n, against dsum * h^(n - codim).

    codim defaults to the number of polynomials and dsum to the product of
    their degrees; the caller is responsible for declaring the right values.
    """
    if not polys:
        raise ValueError("box_count needs at least one polynomial")
    n = max(P.nvars for P in polys)
    axes = [np.arange(h)] * n
    mask = np.ones((h,) * n, dtype=bool)
    for P in polys:
        mask &= eval_box(P.with_nvars(n), p, axes) == 0
    if codim is None:
        codim = len(polys)
    if dsum is None:
        dsum = 1
        for P in polys:
            dsum *= max(P.total_degree(), 1)
    return CensusReport(
        description=f"common zeros of {len(polys)} polynomials mod {p} in [0,{h})^{n}",
        count=int(mask.sum()),
        bound=dsum * h ** (n - codim),
        details={"p": p, "n": n, "h": h, "codim": codim, "dsum": dsum},
    )
