"""Prime fields: roots of unity, discrete logs, characters, and univariate
polynomial algebra over F_p.

Univariate polynomials are plain lists of coefficients, lowest degree
first, with no trailing zeros ([] is the zero polynomial).  Entries are
integers in [0, p) for the F_p routines; resultant() also accepts integer
or Polynomial entries.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from math import gcd as igcd
from typing import Sequence

import numpy as np

from thinset.errors import BadCharacteristic, OrderNotDividing, ZeroPolynomial

MAX_PRIME = 2**20


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic for n < 3.3e24
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_between(lo: int, hi: int) -> list[int]:
    """Primes p with lo <= p <= hi."""
    return [q for q in range(max(lo, 2), hi + 1) if is_prime(q)]


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization of a positive integer."""
    out: dict[int, int] = {}
    q = 2
    while q * q <= n:
        while n % q == 0:
            out[q] = out.get(q, 0) + 1
            n //= q
        q += 1 if q == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def primitive_root(p: int) -> int:
    if p == 2:
        return 1
    qs = list(factorize(p - 1))
    g = 2
    while True:
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
        g += 1


@dataclass(frozen=True, eq=False)
class PrimeCtx:
    """Lookup tables for F_p.

    dlog[x] is the discrete log of x to base g (dlog[0] = -1), roots[j] is
    e_p(j) = exp(2 pi i j / p), and inv[x] is the inverse of x (inv[0] = 0).
    """

    p: int
    g: int
    dlog: np.ndarray
    roots: np.ndarray
    inv: np.ndarray

    def e(self, j) -> complex:
        return self.roots[np.mod(j, self.p)]


@functools.lru_cache(maxsize=64)
def prime_ctx(p: int) -> PrimeCtx:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p > MAX_PRIME:
        raise ValueError(f"p={p} exceeds the supported range 2^20")
    g = primitive_root(p)
    dlog = np.full(p, -1, dtype=np.int64)
    powers = np.empty(p - 1, dtype=np.int64)
    x = 1
    for a in range(p - 1):
        powers[a] = x
        x = x * g % p
    dlog[powers] = np.arange(p - 1)
    inv = np.zeros(p, dtype=np.int64)
    # g^a inverse is g^(p-1-a)
    inv[powers] = powers[(-np.arange(p - 1)) % (p - 1)]
    roots = unit_roots(p)
    for arr in (dlog, inv, roots):
        arr.setflags(write=False)
    return PrimeCtx(p, g, dlog, roots, inv)


@functools.lru_cache(maxsize=256)
def unit_roots(N: int) -> np.ndarray:
    """exp(2 pi i j / N) for j in [0, N), rounded from extended precision."""
    j = np.arange(N, dtype=np.longdouble)
    # np.pi is only double precision
    two_pi = np.longdouble(8) * np.arctan(np.longdouble(1))
    ang = two_pi * j / np.longdouble(N)
    out = (np.cos(ang) + 1j * np.sin(ang)).astype(np.complex128)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Character:
    """Multiplicative character x -> exp(2 pi i k dlog(x) / d), with chi(0) = 0."""

    ctx: PrimeCtx
    d: int
    k: int
    _table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if (self.ctx.p - 1) % self.d:
            raise OrderNotDividing(f"d={self.d} does not divide p-1={self.ctx.p - 1}")
        w = unit_roots(self.d)
        table = np.zeros(self.ctx.p, dtype=np.complex128)
        table[1:] = w[(self.k * self.ctx.dlog[1:]) % self.d]
        table.setflags(write=False)
        object.__setattr__(self, "_table", table)

    @property
    def principal(self) -> bool:
        return self.k % self.d == 0

    def values(self) -> np.ndarray:
        """chi(x) for x = 0, ..., p-1."""
        return self._table

    def __call__(self, x):
        return self._table[np.mod(x, self.ctx.p)]


def characters(ctx: PrimeCtx, d: int) -> list[Character]:
    """All d characters with chi^d principal, the principal one first."""
    if d < 1 or (ctx.p - 1) % d:
        raise OrderNotDividing(f"d={d} does not divide p-1={ctx.p - 1}")
    return [Character(ctx, d, k) for k in range(d)]


def is_dth_power_residue(c: int, d: int, ctx: PrimeCtx) -> bool:
    c %= ctx.p
    if c == 0:
        return True
    return ctx.dlog[c] % igcd(d, ctx.p - 1) == 0


# univariate polynomials over F_p

def trim(a: Sequence[int], p: int | None = None) -> list[int]:
    a = [x % p for x in a] if p else list(a)
    while a and not a[-1]:
        a.pop()
    return a


def padd(a, b, p):
    n = max(len(a), len(b))
    return trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)], p)


def psub(a, b, p):
    return padd(a, [-x for x in b], p)


def pmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return trim(out, p)


def pdivmod(a, b, p):
    b = trim(b, p)
    if not b:
        raise ZeroPolynomial("division by the zero polynomial")
    a = trim(a, p)
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    r = a[:]
    db = len(b) - 1
    while len(r) - 1 >= db and r:
        c = r[-1] * inv % p
        s = len(r) - 1 - db
        q[s] = c
        for i, y in enumerate(b):
            r[s + i] = (r[s + i] - c * y) % p
        r = trim(r)
    return trim(q), r


def pmod(a, b, p):
    return pdivmod(a, b, p)[1]


def monic(a, p):
    a = trim(a, p)
    if not a:
        return a
    inv = pow(a[-1], -1, p)
    return [x * inv % p for x in a]


def pgcd(a, b, p):
    a, b = trim(a, p), trim(b, p)
    while b:
        a, b = b, pmod(a, b, p)
    return monic(a, p)


def pderiv(a, p):
    return trim([i * a[i] for i in range(1, len(a))], p)


def ppow_mod(base, e, mod, p):
    result = [1]
    base = pmod(base, mod, p)
    while e:
        if e & 1:
            result = pmod(pmul(result, base, p), mod, p)
        base = pmod(pmul(base, base, p), mod, p)
        e >>= 1
    return result


def peval(a, x, p):
    v = 0
    for c in reversed(a):
        v = (v * x + c) % p
    return v


def count_roots(g: Sequence[int], p: int) -> int:
    """Number of distinct roots of g in F_p, as deg gcd(g, Y^p - Y)."""
    g = trim(g, p)
    if not g:
        raise ZeroPolynomial("count_roots of the zero polynomial")
    if len(g) == 1:
        return 0
    yp = ppow_mod([0, 1], p, g, p)
    h = psub(yp, [0, 1], p)
    return len(pgcd(g, h, p)) - 1


def _pth_root(a, p):
    return trim([a[i] for i in range(0, len(a), p)], p)


def squarefree_decomposition(g: Sequence[int], p: int):
    """Return (c, [(s, e), ...]) with g = c * prod s^e, each s monic squarefree
    of positive degree and pairwise coprime."""
    g = trim(g, p)
    if not g:
        raise ZeroPolynomial("squarefree decomposition of the zero polynomial")
    c = g[-1]
    parts: dict[tuple, int] = {}

    def add(s, e):
        key = tuple(s)
        parts[key] = parts.get(key, 0) + e

    def rec(f, mult):
        if len(f) <= 1:
            return
        fp = pderiv(f, p)
        if not fp:
            rec(_pth_root(f, p), mult * p)
            return
        cc = pgcd(f, fp, p)
        w = pdivmod(f, cc, p)[0]
        i = 1
        while len(w) > 1:
            y = pgcd(w, cc, p)
            z = monic(pdivmod(w, y, p)[0], p)
            if len(z) > 1:
                add(z, i * mult)
            i += 1
            w = y
            cc = pdivmod(cc, y, p)[0]
        cc = monic(cc, p)
        if len(cc) > 1:
            rec(_pth_root(cc, p), mult * p)

    rec(monic(g, p), 1)
    return c, [(list(s), e) for s, e in parts.items()]


def is_dth_power(g: Sequence[int], d: int, p: int) -> bool:
    """True iff g = r^d for some r in F_p[Y]."""
    if d % p == 0:
        raise BadCharacteristic(f"p={p} divides d={d}")
    c, parts = squarefree_decomposition(g, p)
    if any(e % d for _, e in parts):
        return False
    return is_dth_power_residue(c, d, prime_ctx(p))


# determinants and resultants

def det_mod_p(M, p: int) -> int:
    A = [[x % p for x in row] for row in M]
    n = len(A)
    det = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col]), None)
        if piv is None:
            return 0
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            det = -det
        det = det * A[col][col] % p
        inv = pow(A[col][col], -1, p)
        for r in range(col + 1, n):
            if A[r][col]:
                f = A[r][col] * inv % p
                A[r] = [(a - f * b) % p for a, b in zip(A[r], A[col])]
    return det % p


def det_bareiss(M) -> int:
    """Fraction-free integer determinant."""
    A = [list(map(int, row)) for row in M]
    n = len(A)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            piv = next((r for r in range(k + 1, n) if A[r][k]), None)
            if piv is None:
                return 0
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def det_expand(M):
    """Division-free determinant by minor expansion memoized over column sets.

    Works for entries in any commutative ring whose zero is falsy
    (integers, Polynomial).
    """
    n = len(M)
    if n == 0:
        return 1

    @functools.lru_cache(maxsize=None)
    def rec(used: int):
        row = bin(used).count("1")
        if row == n:
            return 1
        total = 0
        for j in range(n):
            if used >> j & 1:
                continue
            a = M[row][j]
            if not a:
                continue
            sub = rec(used | (1 << j))
            if not sub:
                continue
            # parity of used columns to the right of j
            sgn = -1 if bin(used >> (j + 1)).count("1") % 2 else 1
            term = a * sub
            total = total + term if sgn > 0 else total - term
        return total

    return rec(0)


def sylvester(a: Sequence, b: Sequence, zero=0):
    m, n = len(a) - 1, len(b) - 1
    size = m + n
    rows = []
    for i in range(n):
        row = [zero] * size
        for k, c in enumerate(reversed(a)):
            row[i + k] = c
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for k, c in enumerate(reversed(b)):
            row[i + k] = c
        rows.append(row)
    return rows


def resultant(a: Sequence, b: Sequence, p: int | None = None):
    """Sylvester resultant of a and b (coefficient lists, lowest degree first).

    The formal degrees are len(a) - 1 and len(b) - 1; leading entries must
    be nonzero.  With p given the result is reduced mod p.
    """
    if p is not None:
        a, b = trim(a, p), trim(b, p)
    if not a or not b or not a[-1] or not b[-1]:
        raise ZeroPolynomial("resultant needs nonzero polynomials with nonzero leading entries")
    if len(a) == 1 and len(b) == 1:
        return 1
    zero = a[0] * 0
    S = sylvester(a, b, zero)
    if p is not None:
        return det_mod_p(S, p)
    if all(isinstance(x, int) for row in S for x in row):
        return det_bareiss(S)
    return det_expand(S)


def discriminant(a: Sequence, p: int | None = None):
    """(-1)^(m(m-1)/2) Res(a, a') / lc(a) for a of degree m >= 1."""
    m = len(a) - 1
    da = [i * a[i] for i in range(1, len(a))]
    r = resultant(a, da, p)
    sign = -1 if (m * (m - 1) // 2) % 2 else 1
    lc = a[-1]
    if p is not None:
        return sign * r * pow(lc, -1, p) % p
    q, rem = divmod(r, lc)
    if rem:
        raise ArithmeticError("resultant not divisible by the leading coefficient")
    return sign * q
