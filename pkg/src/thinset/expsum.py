"""Complete exponential sums S(u, p) = sum_x (v_p(x) - 1) e_p(u . x).

All-frequency tables come from a length-p DFT applied along each axis of
the p^n grid: a direct matrix product for small p and a chirp-z
(Bluestein) convolution on a power-of-two FFT otherwise.  Single
frequencies are evaluated exactly as an integer histogram over residues
u . x mod p and only then summed in extended precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from thinset import io
from thinset.errors import OrderNotDividing, TableTooLarge
from thinset.localcount import VTable, grid_values, v_table
from thinset.polyring import Polynomial, decompose_sieved_form, to_text
from thinset.primefield import Character, characters, prime_ctx, unit_roots

EPS = 2.0**-52
NAIVE_MAX_P = 127


def linear_index(x, p: int) -> int:
    """Index of x in a table over F_p^n (x1 fastest)."""
    return int(sum((int(xi) % p) * p**i for i, xi in enumerate(x)))


def coordinates(p: int, n: int) -> np.ndarray:
    """Array of shape (p^n, n): row k is the point with linear index k."""
    idx = np.arange(p**n, dtype=np.int64)
    return np.stack([(idx // p**i) % p for i in range(n)], axis=1)


def _dot_residues(u, p: int, n: int) -> np.ndarray:
    """u . x mod p for every x, in linear-index order."""
    out = np.zeros((p,) * n, dtype=np.int64)
    for i, ui in enumerate(u):
        ui = int(ui) % p
        if ui:
            shape = [1] * n
            shape[n - 1 - i] = p
            out = out + (ui * np.arange(p, dtype=np.int64)).reshape(shape)
    return (out % p).reshape(-1)


@dataclass(frozen=True, eq=False)
class GTable:
    """Centered local counts g(x) = v_p(x) - 1."""

    p: int
    n: int
    data: np.ndarray
    poly: Polynomial | None = None

    def total(self) -> int:
        return int(self.data.sum(dtype=np.int64))

    def grid(self) -> np.ndarray:
        return self.data.reshape((self.p,) * self.n)


def g_table(v: VTable) -> GTable:
    data = v.data.astype(np.int64) - 1
    data.setflags(write=False)
    return GTable(v.p, v.n, data, v.poly)


@dataclass(frozen=True, eq=False)
class ResidueHistogram:
    """a[j] = sum of g(x) over x with u . x = j mod p; S(u, p) = sum_j a[j] e_p(j)."""

    p: int
    u: tuple[int, ...]
    a: np.ndarray

    def total(self) -> int:
        return int(self.a.sum())

    def evaluate(self) -> complex:
        """Evaluate in 64-bit-mantissa precision, rounded to complex double."""
        j = np.arange(self.p, dtype=np.longdouble)
        two_pi = np.longdouble(8) * np.arctan(np.longdouble(1))
        ang = two_pi * j / np.longdouble(self.p)
        w = self.a.astype(np.longdouble)
        re = np.sum(w * np.cos(ang))
        im = np.sum(w * np.sin(ang))
        return complex(float(re), float(im))


def residue_histogram(g: GTable, u) -> ResidueHistogram:
    u = tuple(int(x) % g.p for x in u)
    if len(u) != g.n:
        raise ValueError("frequency has the wrong length")
    idx = _dot_residues(u, g.p, g.n)
    a = np.zeros(g.p, dtype=np.int64)
    np.add.at(a, idx, g.data)
    a.setflags(write=False)
    return ResidueHistogram(g.p, u, a)


def sum_single(g: GTable, u) -> complex:
    return residue_histogram(g, u).evaluate()


@dataclass(frozen=True, eq=False)
class SumTable:
    p: int
    n: int
    data: np.ndarray
    method: str
    max_abs_error_estimate: float
    poly: Polynomial | None = None

    def grid(self) -> np.ndarray:
        return self.data.reshape((self.p,) * self.n)

    def at(self, u) -> complex:
        return complex(self.data[linear_index(u, self.p)])

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.data)

    def export(self, path) -> dict:
        raw = self.data.astype("<c16").tobytes()
        meta = {
            "schema": io.SCHEMA,
            "kind": "sumtable",
            "p": self.p,
            "n": self.n,
            "method": self.method,
            "error_estimate": self.max_abs_error_estimate,
            "polynomial": to_text(self.poly) if self.poly is not None else None,
        }
        return io.write_raw_table(path, raw, meta)


def dft_matrix(p: int) -> np.ndarray:
    """E[u, x] = e_p(u x), built from exact residues."""
    k = np.arange(p, dtype=np.int64)
    return unit_roots(p)[np.outer(k, k) % p]


def _dft_naive(arr: np.ndarray, axis: int, p: int) -> np.ndarray:
    E = dft_matrix(p)
    out = np.tensordot(E, arr, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def _dft_chirp(arr: np.ndarray, axis: int, p: int) -> np.ndarray:
    # u x = (u^2 + x^2 - (u - x)^2) / 2 turns the DFT into a convolution
    a = np.moveaxis(arr, axis, -1).astype(np.complex128)
    j = np.arange(p, dtype=np.int64)
    chirp = unit_roots(2 * p)[(j * j) % (2 * p)]
    L = 1
    while L < 2 * p - 1:
        L *= 2
    kernel = np.zeros(L, dtype=np.complex128)
    kernel[:p] = chirp.conj()
    kernel[L - p + 1:] = chirp[1:][::-1].conj()
    padded = np.zeros(a.shape[:-1] + (L,), dtype=np.complex128)
    padded[..., :p] = a * chirp
    conv = np.fft.ifft(np.fft.fft(padded, axis=-1) * np.fft.fft(kernel), axis=-1)
    out = conv[..., :p] * chirp
    return np.moveaxis(out, -1, axis)


def full_dft(g: GTable, method: str | None = None, cap: int | None = None) -> SumTable:
    """S(u, p) for every u in F_p^n."""
    p, n = g.p, g.n
    if p**n > io.table_cap(cap):
        raise TableTooLarge(f"p^n = {p**n} exceeds the table cap")
    if method is None:
        method = "naive" if p <= NAIVE_MAX_P else "chirp"
    if method not in ("naive", "chirp"):
        raise ValueError(f"unknown DFT method {method!r}")
    step = _dft_naive if method == "naive" else _dft_chirp
    arr = g.grid().astype(np.complex128)
    for axis in range(n):
        arr = step(arr, axis, p)
    data = np.ascontiguousarray(arr).reshape(-1)
    data.setflags(write=False)
    l2 = float(np.sqrt(np.sum(g.data.astype(np.float64) ** 2)))
    est = EPS * p ** (n / 2) * (1 + np.log2(p) * n) * max(1.0, l2)
    return SumTable(p, n, data, method, float(est), g.poly)


def sum_table(F: Polynomial, p: int, method: str | None = None, cap: int | None = None):
    """(GTable, SumTable) for F at p."""
    g = g_table(v_table(F, p, cap))
    return g, full_dft(g, method, cap)


def parseval(g: GTable, s: SumTable) -> tuple[float, int, float]:
    """(sum_u |S|^2, p^n sum_x g^2 exactly, relative error)."""
    if (g.p, g.n) != (s.p, s.n):
        raise ValueError("tables are over different spaces")
    lhs = float(np.sum(np.abs(s.data) ** 2))
    rhs = g.p**g.n * int(np.sum(g.data.astype(object) ** 2)) if g.data.size else 0
    rel = abs(lhs - rhs) / rhs if rhs > 0 else 0.0
    return lhs, rhs, rel


def conjugate_symmetry_residual(s: SumTable) -> float:
    """max_u |S(-u) - conj S(u)|."""
    grid = s.grid()
    neg = grid
    for axis in range(s.n):
        neg = np.roll(np.flip(neg, axis=axis), 1, axis=axis)
    return float(np.max(np.abs(neg - grid.conj()))) if grid.size else 0.0


def char_sum(chi: Character, H: Polynomial, u) -> complex:
    """sum_x chi(H(x)) e_p(u . x) over F_p^n, with chi(0) = 0."""
    p = chi.ctx.p
    n = H.nvars
    vals = grid_values(H, p, n)
    phase = unit_roots(p)[_dot_residues(u, p, n)]
    return complex(np.sum(chi.values()[vals] * phase))


def split_cyclic(F: Polynomial) -> tuple[int, Polynomial]:
    """(d, H) with F = Y^d - H(X)."""
    D = F.degree(0)
    form = decompose_sieved_form(F, D)
    return D, -form.coeffs[0]


def cyclic_decomposition_check(F: Polynomial, p: int) -> float:
    """max_x |v_p(x) - [H(x) != 0] sum_{chi^d = 1} chi(H(x)) - [H(x) = 0]|."""
    d, H = split_cyclic(F)
    if (p - 1) % d:
        raise OrderNotDividing(f"d={d} does not divide p-1={p - 1}")
    vt = v_table(F, p)
    hv = grid_values(H, p, F.nvars)
    total = sum(chi.values()[hv] for chi in characters(prime_ctx(p), d))
    predicted = np.where(hv != 0, total, 1.0)
    return float(np.max(np.abs(vt.data - predicted)))


def bilinear_table(F: Polynomial, p: int, q: int, cap: int | None = None) -> np.ndarray:
    """(v_p(a) - 1)(v_q(a) - 1) over a in (Z/pq)^n, linear-index order."""
    n = F.nvars
    N = p * q
    if N**n > io.table_cap(cap):
        raise TableTooLarge(f"(pq)^n = {N**n} exceeds the table cap")
    gp = g_table(v_table(F, p, cap)).data
    gq = g_table(v_table(F, q, cap)).data
    a = coordinates(N, n)
    ip = (a % p) @ (p ** np.arange(n))
    iq = (a % q) @ (q ** np.arange(n))
    return gp[ip] * gq[iq]


def sum_pq_direct(table: np.ndarray, N: int, n: int, u) -> complex:
    """sum_a table[a] e_N(u . a) by direct summation."""
    idx = _dot_residues(u, N, n)
    return complex(np.sum(table * unit_roots(N)[idx]))


def multiplicativity_check(
    F: Polynomial,
    p: int,
    q: int,
    trials: int = 50,
    rng: np.random.Generator | None = None,
    cap: int | None = None,
) -> float:
    """Max |S(u, pq) - S(qbar u, p) S(pbar u, q)| over u = 0 and `trials` random u."""
    if p == q:
        raise ValueError("p and q must be distinct")
    rng = rng if rng is not None else np.random.default_rng(0)
    n = F.nvars
    N = p * q
    table = bilinear_table(F, p, q, cap)
    _, sp = sum_table(F, p, cap=cap)
    _, sq = sum_table(F, q, cap=cap)
    qbar = pow(q, -1, p)
    pbar = pow(p, -1, q)
    us = [np.zeros(n, dtype=np.int64)] + [rng.integers(0, N, size=n) for _ in range(trials)]
    worst = 0.0
    for u in us:
        left = sum_pq_direct(table, N, n, u)
        right = sp.at([qbar * int(x) for x in u]) * sq.at([pbar * int(x) for x in u])
        worst = max(worst, abs(left - right))
    return worst
