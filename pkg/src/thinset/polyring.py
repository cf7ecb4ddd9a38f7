"""Sparse multivariate integer polynomials in Y, X1, ..., Xn.

A polynomial is a map from exponent vectors to nonzero Python integers.
Index 0 of every exponent vector is Y and index i is X_i, so a polynomial
in n X-variables carries vectors of length n + 1.

    Y^2 - X1      ->  {(2, 0): 1, (0, 1): -1},  nvars = 1

Coefficients never overflow; all arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from thinset.errors import NotHomogeneous, NotSievedForm, ParseError

Exponent = tuple[int, ...]

MAX_EXPONENT = 2**31


class Polynomial:
    """Immutable sparse polynomial with integer coefficients.

    Equality and hashing go through the canonical term map, so two
    polynomials compare equal exactly when they have the same terms and
    the same number of X-variables.
    """

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exponent, int] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        clean: dict[Exponent, int] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars + 1:
                raise ValueError(f"exponent {exp} does not have length {nvars + 1}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            c = int(c)
            if c:
                clean[exp] = clean.get(exp, 0) + c
                if not clean[exp]:
                    del clean[exp]
        self.nvars = nvars
        self._terms = clean
        self._hash = None

    # construction helpers

    @classmethod
    def const(cls, c: int, nvars: int) -> "Polynomial":
        return cls(nvars, {(0,) * (nvars + 1): c})

    @classmethod
    def var(cls, i: int, nvars: int) -> "Polynomial":
        """Y for i = 0, X_i for 1 <= i <= nvars."""
        if not 0 <= i <= nvars:
            raise ValueError(f"variable index {i} out of range for nvars={nvars}")
        exp = [0] * (nvars + 1)
        exp[i] = 1
        return cls(nvars, {tuple(exp): 1})

    @property
    def terms(self) -> Mapping[Exponent, int]:
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def with_nvars(self, nvars: int) -> "Polynomial":
        """Embed into a ring with more X-variables (or drop unused ones)."""
        if nvars == self.nvars:
            return self
        out = {}
        for exp, c in self._terms.items():
            if nvars < self.nvars and any(exp[nvars + 1:]):
                raise ValueError(f"polynomial depends on X{nvars + 1} or later")
            out[(exp + (0,) * nvars)[: nvars + 1]] = c
        return Polynomial(nvars, out)

    # arithmetic

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars == self.nvars:
                return other
            n = max(self.nvars, other.nvars)
            if n != self.nvars:
                raise ValueError("mixing polynomials in different numbers of variables")
            return other.with_nvars(n)
        if isinstance(other, int):
            return Polynomial.const(other, self.nvars)
        return NotImplemented

    def _lift(self, other):
        # bring self and other to a common nvars
        if isinstance(other, Polynomial) and other.nvars > self.nvars:
            return self.with_nvars(other.nvars), other
        o = self._coerce(other)
        return self, o

    def __add__(self, other):
        a, b = self._lift(other)
        if b is NotImplemented:
            return NotImplemented
        out = dict(a._terms)
        for exp, c in b._terms.items():
            out[exp] = out.get(exp, 0) + c
        return Polynomial(a.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        a, b = self._lift(other)
        if b is NotImplemented:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._lift(other)
        if b is NotImplemented:
            return NotImplemented
        out: dict[Exponent, int] = {}
        for e1, c1 in a._terms.items():
            for e2, c2 in b._terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(a.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Polynomial.const(1, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = Polynomial.const(other, self.nvars)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, tuple(sorted_terms(self))))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f"Polynomial({self.nvars}, {to_text(self)!r})"

    def __str__(self):
        return to_text(self)

    # structure

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self, i: int) -> int:
        """Degree in variable i (0 = Y); -1 for the zero polynomial."""
        return max((e[i] for e in self._terms), default=-1)

    def total_degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def x_degree(self) -> int:
        """Total degree in the X-variables only."""
        return max((sum(e[1:]) for e in self._terms), default=-1)

    def depends_on(self, i: int) -> bool:
        return any(e[i] for e in self._terms)

    def coeffs_in(self, i: int) -> list["Polynomial"]:
        """Coefficients c_k with self = sum_k c_k * var_i^k (c_k free of var_i)."""
        deg = self.degree(i)
        buckets: list[dict] = [{} for _ in range(deg + 1)]
        for exp, c in self._terms.items():
            k = exp[i]
            e = list(exp)
            e[i] = 0
            buckets[k][tuple(e)] = c
        return [Polynomial(self.nvars, b) for b in buckets]

    def derivative(self, i: int) -> "Polynomial":
        out = {}
        for exp, c in self._terms.items():
            if exp[i]:
                e = list(exp)
                e[i] -= 1
                out[tuple(e)] = c * exp[i]
        return Polynomial(self.nvars, out)

    def evaluate(self, point: Sequence[int], modulus: int | None = None) -> int:
        """Value at (y, x1, ..., xn)."""
        if len(point) != self.nvars + 1:
            raise ValueError("point has the wrong length")
        total = 0
        for exp, c in self._terms.items():
            v = c
            for xi, e in zip(point, exp):
                if e:
                    v *= pow(xi, e, modulus) if modulus else xi**e
            total += v
        return total % modulus if modulus else total

    def specialize(self, bindings: Mapping[int, int]) -> "Polynomial":
        return specialize(self, bindings)

    def substitute_linear(self, L: Sequence[Sequence[int]]) -> "Polynomial":
        """Return H(L X): X_i is replaced by sum_j L[i-1][j-1] X_j; Y is kept."""
        n = self.nvars
        if len(L) != n or any(len(row) != n for row in L):
            raise ValueError("L must be n x n")
        forms = [Polynomial.var(0, n)]
        for row in L:
            f = Polynomial(n)
            for j, a in enumerate(row):
                if a:
                    f = f + a * Polynomial.var(j + 1, n)
            forms.append(f)
        out = Polynomial(n)
        for exp, c in self._terms.items():
            t = Polynomial.const(c, n)
            for f, e in zip(forms, exp):
                if e:
                    t = t * f**e
            out = out + t
        return out


def sorted_terms(F: Polynomial) -> list[tuple[Exponent, int]]:
    """Terms in descending graded lexicographic order (Y compared first)."""
    return sorted(F.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)


def _monomial_text(exp: Exponent) -> str:
    parts = []
    for i, e in enumerate(exp):
        if not e:
            continue
        name = "Y" if i == 0 else f"X{i}"
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def to_text(F: Polynomial) -> str:
    """Canonical text form; parse(to_text(F)) == F for nvars = max index."""
    if F.is_zero():
        return "0"
    out = []
    for k, (exp, c) in enumerate(sorted_terms(F)):
        mono = _monomial_text(exp)
        a = abs(c)
        body = str(a) if not mono else (mono if a == 1 else f"{a}*{mono}")
        if k == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


def norm(F: Polynomial) -> int:
    """Largest absolute value of a coefficient (0 for the zero polynomial)."""
    return max((abs(c) for _, c in F.items()), default=0)


# parsing

_PUNCT = set("+-*^()")


def _tokenize(text: str):
    toks = []
    i = 0
    n = len(text)

    def offset(k):
        return len(text[:k].encode("utf-8"))

    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in _PUNCT:
            toks.append((ch, ch, offset(i)))
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("int", int(text[i:j]), offset(i)))
            i = j
        elif ch == "Y":
            toks.append(("var", 0, offset(i)))
            i += 1
        elif ch == "X":
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j == i + 1:
                raise ParseError("expected variable index after 'X'", offset(j))
            idx = int(text[i + 1:j])
            if idx == 0:
                raise ParseError("variable index 0 is not allowed", offset(i))
            toks.append(("var", idx, offset(i)))
            i = j
        else:
            raise ParseError(f"unexpected character {ch!r}", offset(i))
    toks.append(("eof", None, len(text.encode("utf-8"))))
    return toks


class _Parser:
    def __init__(self, toks, nvars):
        self.toks = toks
        self.pos = 0
        self.nvars = nvars

    def peek(self):
        return self.toks[self.pos]

    def take(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def fail(self, what):
        kind, val, off = self.peek()
        got = "end of input" if kind == "eof" else repr(val if kind != "var" else ("Y" if val == 0 else f"X{val}"))
        raise ParseError(f"expected {what}, got {got}", off)

    def poly(self):
        neg = False
        if self.peek()[0] == "-":
            self.take()
            neg = True
        acc = self.term()
        if neg:
            acc = -acc
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self):
        acc = self.factor()
        while self.peek()[0] == "*":
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self):
        kind, val, off = self.peek()
        if kind == "int":
            self.take()
            return Polynomial.const(val, self.nvars)
        if kind == "var":
            self.take()
            v = Polynomial.var(val, self.nvars)
            if self.peek()[0] == "^":
                self.take()
                k2, e, eoff = self.peek()
                if k2 != "int":
                    self.fail("unsigned exponent")
                self.take()
                if e > MAX_EXPONENT:
                    raise ParseError("exponent exceeds 2^31", eoff)
                exp = [0] * (self.nvars + 1)
                exp[val] = e
                return Polynomial(self.nvars, {tuple(exp): 1})
            return v
        if kind == "(":
            self.take()
            inner = self.poly()
            if self.peek()[0] != ")":
                self.fail("')'")
            self.take()
            return inner
        self.fail("integer, variable or '('")


def parse(text: str, nvars: int | None = None) -> Polynomial:
    """Parse polynomial text; nvars defaults to the largest X index present."""
    toks = _tokenize(text)
    top = max((v for k, v, _ in toks if k == "var"), default=0)
    if nvars is None:
        nvars = top
    elif nvars < top:
        raise ParseError(f"X{top} exceeds nvars={nvars}", 0)
    p = _Parser(toks, nvars)
    result = p.poly()
    if p.peek()[0] != "eof":
        p.fail("'+', '-', '*' or end of input")
    return result


# specialization and reduction

def specialize(F: Polynomial, bindings: Mapping[int, int]) -> Polynomial:
    """Substitute integers for some X_i; the result keeps F's nvars."""
    for i in bindings:
        if not 1 <= i <= F.nvars:
            raise ValueError(f"cannot bind X{i} in a polynomial with nvars={F.nvars}")
    if not bindings:
        return F
    out: dict[Exponent, int] = {}
    for exp, c in F.items():
        e = list(exp)
        for i, val in bindings.items():
            if e[i]:
                c *= val ** e[i]
                e[i] = 0
        key = tuple(e)
        out[key] = out.get(key, 0) + c
    return Polynomial(F.nvars, out)


@dataclass(frozen=True)
class ReducedPolynomial:
    """F mod p with coefficients in [0, p)."""

    poly: Polynomial
    p: int
    degree_dropped: bool

    def specialize(self, bindings: Mapping[int, int]) -> "ReducedPolynomial":
        sub = specialize(self.poly, {i: v % self.p for i, v in bindings.items()})
        red = reduce_mod(sub, self.p)
        return ReducedPolynomial(red.poly, self.p, self.degree_dropped)

    def is_zero(self) -> bool:
        return self.poly.is_zero()


def reduce_mod(F: Polynomial, p: int) -> ReducedPolynomial:
    poly = Polynomial(F.nvars, {e: c % p for e, c in F.items()})
    return ReducedPolynomial(poly, p, poly.total_degree() < F.total_degree())


# structured forms

@dataclass(frozen=True)
class SievedForm:
    """Y^(m d) + sum_j Y^(m (d - j)) f_j(X) with f_d nonzero."""

    m: int
    d: int
    coeffs: tuple[Polynomial, ...]
    source: Polynomial

    @property
    def degY(self) -> int:
        return self.m * self.d

    @property
    def f_d(self) -> Polynomial:
        return self.coeffs[-1]

    def reconstruct(self) -> Polynomial:
        n = self.source.nvars
        Y = Polynomial.var(0, n)
        out = Y ** (self.m * self.d)
        for j, f in enumerate(self.coeffs, start=1):
            out = out + Y ** (self.m * (self.d - j)) * f
        return out


def is_monic_in_y(F: Polynomial) -> bool:
    k = F.degree(0)
    return k >= 0 and F.coeffs_in(0)[k] == Polynomial.const(1, F.nvars)


def decompose_sieved_form(F: Polynomial, m: int) -> SievedForm:
    if m < 1:
        raise ValueError("m must be positive")
    D = F.degree(0)
    if D < 1 or not is_monic_in_y(F):
        raise NotSievedForm("polynomial is not monic in Y of positive degree")
    for exp in F.terms:
        if exp[0] % m:
            raise NotSievedForm(f"Y exponent {exp[0]} is not a multiple of m={m}")
    if D % m:
        raise NotSievedForm(f"Y-degree {D} is not a multiple of m={m}")
    d = D // m
    cs = F.coeffs_in(0)
    coeffs = tuple(cs[m * (d - j)] for j in range(1, d + 1))
    if coeffs[-1].is_zero():
        raise NotSievedForm("f_d is identically zero")
    return SievedForm(m, d, coeffs, F)


# essential variables

def is_homogeneous(H: Polynomial) -> bool:
    degs = {sum(e) for e in H.terms}
    return len(degs) <= 1


def _rank(rows: list[list[Fraction]]) -> int:
    rows = [r[:] for r in rows if any(r)]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pr = rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col] / pr[col]
                rows[i] = [a - f * b for a, b in zip(rows[i], pr)]
        rank += 1
    return rank


def essential_variables(H: Polynomial) -> int:
    """Rank of the span of the first partials of a form H(X1..Xn).

    Equals the least number of variables H can be written in after an
    invertible rational linear change of the X-variables.
    """
    if H.depends_on(0):
        raise NotHomogeneous("H must not involve Y")
    if H.is_zero() or H.total_degree() < 1:
        raise NotHomogeneous("H must be a nonzero form of degree >= 1")
    if not is_homogeneous(H):
        raise NotHomogeneous("H is not homogeneous; essential variables undecided")
    partials = [H.derivative(i) for i in range(1, H.nvars + 1)]
    monos = sorted({e for P in partials for e in P.terms})
    rows = [[Fraction(P.terms.get(e, 0)) for e in monos] for P in partials]
    return _rank(rows)


def iter_monomials(nvars: int, max_degree: int) -> Iterable[Exponent]:
    """All X-exponent vectors (Y exponent 0) of total degree <= max_degree."""

    def rec(i, left):
        if i > nvars:
            yield ()
            return
        for e in range(left + 1):
            for rest in rec(i + 1, left - e):
                yield (e,) + rest

    for tail in rec(1, max_degree):
        yield (0,) + tail
