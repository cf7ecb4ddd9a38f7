"""Exact integral-point counts N(F, B), the smooth weight, sieving sets, the
right-hand side of the polynomial sieve, the bilinear term T(p, q; B) and
exponent scans.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
import sympy

from thinset import io
from thinset.errors import EmptySet, NotMonicInY, NotSievedForm, PairBudgetExceeded, TableTooLarge
from thinset.expsum import coordinates, g_table, sum_table
from thinset.localcount import v_table
from thinset.polyring import Polynomial, SievedForm, decompose_sieved_form, is_monic_in_y, norm, to_text
from thinset.primefield import primes_between
from thinset.strata import exceptional_reasons, pilot_discriminant

DEFAULT_PAIR_BUDGET = 200
TAIL_TOLERANCE = 1e-9
U_EXPONENT = 0.2
_INT64_SAFE = 2**62


# integer roots

@functools.lru_cache(maxsize=1 << 16)
def _divisors(c: int) -> tuple[int, ...]:
    return tuple(sympy.divisors(abs(c)))


def _horner(f: Sequence[int], y: int) -> int:
    v = 0
    for c in reversed(f):
        v = v * y + c
    return v


def integer_roots(f: Sequence[int]) -> list[int]:
    """Integer roots of a monic integer polynomial (coefficients low degree first).

    Any root divides f[0] and lies within the Cauchy bound 1 + max |f_i|.
    A zero polynomial is not accepted.
    """
    f = [int(c) for c in f]
    if not f or f[-1] != 1:
        raise NotMonicInY("integer root search needs a monic polynomial")
    if len(f) == 1:
        return []
    roots = []
    k = 0
    while k < len(f) - 1 and f[k] == 0:
        k += 1
    if k:
        roots.append(0)
        f = f[k:]
    if len(f) == 1:
        return roots
    bound = 1 + max(abs(c) for c in f[:-1])
    for t in _divisors(f[0]):
        if t > bound:
            break
        for y in (t, -t):
            if _horner(f, y) == 0:
                roots.append(y)
    return sorted(roots)


def _eval_int_box(P: Polynomial, axes: Sequence[np.ndarray], dtype) -> np.ndarray:
    """Integer values of an X-only polynomial on the product of axes (x1 last)."""
    n = len(axes)
    shape = tuple(len(a) for a in reversed(axes))
    out = np.zeros(shape, dtype=dtype)
    for exp, c in P.items():
        t = np.full((1,) * n, c, dtype=dtype)
        for i in range(n):
            e = exp[i + 1]
            if e:
                view = [1] * n
                view[n - 1 - i] = len(axes[i])
                t = t * (np.asarray(axes[i]).astype(dtype) ** e).reshape(view)
        out = out + t
    return out


@dataclass
class _BoxRows:
    """Coefficient rows of F(Y, x) over an integer box, deduplicated."""

    rows: list[tuple[int, ...]]
    inverse: np.ndarray
    shape: tuple[int, ...]


def _box_rows(F: Polynomial, axes: Sequence[np.ndarray]) -> _BoxRows:
    reach = max((int(np.max(np.abs(a))) for a in axes if len(a)), default=0)
    big = norm(F) * max(reach, 1) ** max(F.x_degree(), 0) >= _INT64_SAFE
    dtype = object if big else np.int64
    cols = [_eval_int_box(c, axes, dtype).reshape(-1) for c in F.coeffs_in(0)]
    shape = tuple(len(a) for a in reversed(axes))
    if dtype is object:
        keys = list(zip(*cols))
        index: dict = {}
        inverse = np.array([index.setdefault(k, len(index)) for k in keys], dtype=np.int64)
        rows = list(index)
    else:
        M = np.stack(cols, axis=1)
        uniq, inverse = np.unique(M, axis=0, return_inverse=True)
        rows = [tuple(int(v) for v in r) for r in uniq]
    return _BoxRows(rows, inverse.reshape(-1), shape)


def solvable_mask(F: Polynomial, axes: Sequence[np.ndarray]) -> np.ndarray:
    """Boolean array over the box (x1 last): F(y, x) = 0 has an integer root."""
    if not is_monic_in_y(F):
        raise NotMonicInY("F must be monic in Y")
    br = _box_rows(F, axes)
    ok = np.array([bool(integer_roots(r)) for r in br.rows], dtype=bool)
    return ok[br.inverse].reshape(br.shape)


def brute_count(F: Polynomial, B: int) -> int:
    """N(F, B) = #{x in [-B, B]^n : F(y, x) = 0 for some integer y}."""
    if not is_monic_in_y(F):
        raise NotMonicInY("F must be monic in Y")
    if B < 0:
        raise ValueError("B must be nonnegative")
    n = F.nvars
    present = [i for i in range(1, n + 1) if F.depends_on(i)]
    free = n - len(present)
    # absent variables contribute a full factor each
    G = _compress(F, present)
    axes = [np.arange(-B, B + 1)] * len(present)
    count = int(solvable_mask(G, axes).sum()) if present else int(bool(integer_roots(_y_coeffs(G))))
    return count * (2 * B + 1) ** free


def _compress(F: Polynomial, present: list[int]) -> Polynomial:
    keep = [0] + present
    terms = {tuple(e[i] for i in keep): c for e, c in F.items()}
    return Polynomial(len(present), terms)


def _y_coeffs(F: Polynomial) -> list[int]:
    return [c.evaluate((0,) * (F.nvars + 1)) for c in F.coeffs_in(0)]


def brute_count_scan(F: Polynomial, B: int) -> int:
    """Oracle: direct scan over |y| within the Cauchy bound of F(Y, x)."""
    n = F.nvars
    coeffs = F.coeffs_in(0)
    count = 0
    for x in itertools.product(range(-B, B + 1), repeat=n):
        f = [c.evaluate((0,) + x) for c in coeffs]
        R = 1 + max((abs(c) for c in f[:-1]), default=0)
        if any(_horner(f, y) == 0 for y in range(-R, R + 1)):
            count += 1
    return count


# weights

@dataclass(frozen=True)
class Weight:
    """W(x) = prod_i psi(x_i / B), psi(t) = e^(1/3) exp(-1/(4 - t^2)) on |t| < 2."""

    B: float
    tag: str = "bump-e13"

    @staticmethod
    def psi(t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros_like(t)
        inside = np.abs(t) < 2
        ti = t[inside]
        out[inside] = np.exp(1.0 / 3.0 - 1.0 / (4.0 - ti * ti))
        return out

    def axis(self, xs) -> np.ndarray:
        return self.psi(np.asarray(xs, dtype=np.float64) / self.B)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.prod(self.psi(x / self.B), axis=-1)

    def box(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Product weights on the box, x1 last."""
        n = len(axes)
        out = np.ones((1,) * n)
        for i, a in enumerate(axes):
            view = [1] * n
            view[n - 1 - i] = len(a)
            out = out * self.axis(a).reshape(view)
        return out

    def support_axis(self) -> np.ndarray:
        """Integers x with |x| < 2B."""
        R = math.ceil(2 * self.B) - 1
        return np.arange(-R, R + 1)


# sieving sets

@dataclass
class SievingSet:
    P: int
    m: int
    primes: list[int]
    excluded: list[tuple[int, str]]
    pilot: tuple | None = None

    def __len__(self):
        return len(self.primes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pilot"] = None if self.pilot is None else {"x": list(self.pilot[0]), "value": self.pilot[1]}
        return d


def sieving_set(F: Polynomial, P: int, m: int, user_excluded: Sequence[int] = ()) -> SievingSet:
    """Primes p in [P, 2P] with p = 1 mod m, minus exceptional primes."""
    if P < 3:
        raise ValueError("P must be at least 3")
    if m < 1:
        raise ValueError("m must be positive")
    pilot = pilot_discriminant(F)
    small = max(m, F.total_degree())
    user = set(user_excluded)
    primes, excluded = [], []
    for p in primes_between(P, 2 * P):
        if (p - 1) % m:
            continue
        if p <= small:
            excluded.append((p, "small-prime"))
            continue
        if p in user:
            excluded.append((p, "user"))
            continue
        reasons = exceptional_reasons(F, p, pilot)
        if reasons:
            excluded.append((p, reasons[0]))
            continue
        primes.append(p)
    if not primes:
        raise EmptySet(f"no primes survive in [{P}, {2 * P}] with p = 1 mod {m}")
    return SievingSet(P, m, primes, excluded, pilot)


# detector property

def solvable_detector_check(form: SievedForm, primes, B: int) -> list[dict]:
    """Check that v_p(x) >= m whenever x has a nonzero integer root y0 with
    f_d(x) != 0, p not dividing y0 f_d(x)."""
    if form.m < 2:
        raise ValueError("the detector needs m >= 2")
    plist = list(primes.primes if isinstance(primes, SievingSet) else primes)
    F = form.source
    n = F.nvars
    axes = [np.arange(-B, B + 1)] * n
    br = _box_rows(F, axes)
    fd = _eval_int_box(form.f_d, axes, object).reshape(-1)
    tables = {p: v_table(F, p) for p in plist}
    X = coordinates(2 * B + 1, n) - B
    violations = []
    row_roots = [integer_roots(r) for r in br.rows]
    for k in range(len(br.inverse)):
        roots = [y for y in row_roots[br.inverse[k]] if y != 0]
        if not roots or fd[k] == 0:
            continue
        x = X[k].tolist()
        for p in plist:
            if int(fd[k]) % p == 0:
                continue
            for y0 in roots:
                if y0 % p == 0:
                    continue
                v = tables[p].at(x)
                if v < form.m:
                    violations.append({"x": x, "y0": y0, "p": p, "v": v})
                break
    return violations


# sieve right-hand side

@dataclass
class SieveReport:
    B: int
    P: int
    m: int
    N_exact: int
    S_smoothed: float
    term1: float
    term2: float
    term3: float
    measured_constant: float
    primes: list[int]
    pairs_total: int
    pairs_used: int
    seed: int
    viability: dict = field(default_factory=dict)
    polynomial: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def infer_m(F: Polynomial) -> int:
    """gcd of the Y-exponents of F."""
    return math.gcd(*(e[0] for e in F.terms)) if F.terms else 0


def sieve_rhs(
    F: Polynomial,
    B: int,
    P: int | None = None,
    m: int | None = None,
    rho: float | None = None,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    allow_subsample: bool = True,
    seed: int = 0,
    user_excluded: Sequence[int] = (),
) -> SieveReport:
    """Evaluate the three terms bounding sum_{x solvable} W(x) on (-2B, 2B)^n."""
    if isinstance(F, SievedForm):
        form = F
    else:
        form = decompose_sieved_form(F, infer_m(F) if m is None else m)
    if form.m < 2:
        raise NotSievedForm("the unconditional sieve needs m >= 2")
    F = form.source
    if P is None:
        if rho is None:
            raise ValueError("give P or rho")
        P = max(3, math.ceil(B**rho))
    n = F.nvars
    W = Weight(B)
    ax = W.support_axis()
    axes = [ax] * n
    Wbox = W.box(axes)
    solv = solvable_mask(F, axes)
    S_smoothed = float(np.sum(Wbox[solv]))
    inner = np.abs(ax) <= B
    sl = np.ix_(*([inner] * n))
    N_exact = int(solv[sl].sum())

    fd = _eval_int_box(form.f_d, axes, object if F.x_degree() * math.log2(2 * B + 1) > 40 else np.int64)
    term1 = float(np.sum(Wbox[fd == 0]))
    sset = sieving_set(F, P, form.m, user_excluded)
    k = len(sset.primes)
    term2 = float(np.sum(Wbox)) / k

    pairs = list(itertools.combinations(sset.primes, 2))
    rng = np.random.default_rng(seed)
    if len(pairs) > pair_budget:
        if not allow_subsample:
            raise PairBudgetExceeded(f"{len(pairs)} pairs exceed the budget {pair_budget}")
        pick = rng.choice(len(pairs), size=pair_budget, replace=False)
        used = [pairs[i] for i in sorted(pick)]
    else:
        used = pairs
    X = coordinates(len(ax), n) + ax[0]
    Wflat = Wbox.reshape(-1)
    gs = {}
    for p in sset.primes:
        g = g_table(v_table(F, p)).data
        gs[p] = g[(X % p) @ (p ** np.arange(n))]
    acc = 0.0
    for p, q in used:
        acc += abs(float(np.sum(Wflat * gs[p] * gs[q])))
    # ordered pairs count each unordered pair twice
    term3 = 2.0 * acc * (len(pairs) / len(used) if used else 0.0) / k**2
    total = term1 + term2 + term3
    fnorm = norm(form.f_d)
    viability = {
        "size_times_logP_over_P": k * math.log(P) / P,
        "log_norm_fd": math.log(fnorm) if fnorm > 0 else float("-inf"),
        "log_B": math.log(B),
        "excluded": sset.excluded,
    }
    return SieveReport(
        B=B,
        P=P,
        m=form.m,
        N_exact=N_exact,
        S_smoothed=S_smoothed,
        term1=term1,
        term2=term2,
        term3=term3,
        measured_constant=S_smoothed / total if total > 0 else float("inf"),
        primes=sset.primes,
        pairs_total=len(pairs),
        pairs_used=len(used),
        seed=seed,
        viability=viability,
        polynomial=to_text(F),
    )


# bilinear term

@dataclass
class BilinearReport:
    p: int
    q: int
    B: float
    M: int
    U: int
    T_value: float
    tail_bound: float
    direct_value: float

    def to_dict(self) -> dict:
        return asdict(self)


def _folded_weights(N: int, B: float, M: int, U: int) -> tuple[np.ndarray, float]:
    """(sum over u = r mod N, |u| <= U of (1 + |u| B / N)^-M, tail bound)."""
    u = np.arange(-U, U + 1)
    w = (1.0 + np.abs(u) * B / N) ** (-M)
    folded = np.zeros(N)
    np.add.at(folded, u % N, w)
    # sum_{|u| > U} w(u) <= 2 int_U^inf (1 + tB/N)^-M dt
    tail = 2.0 * (N / B) * (1.0 + U * B / N) ** (1 - M) / (M - 1)
    return folded, tail


def bilinear_term(
    F: Polynomial,
    B: float,
    p: int,
    q: int,
    M: int,
    tolerance: float = TAIL_TOLERANCE,
    cap: int | None = None,
) -> BilinearReport:
    """T(p, q; B) = (B / pq)^n sum_u |S(qbar u, p)| |S(pbar u, q)| prod_i (1 + |u_i| B / pq)^-M."""
    n = F.nvars
    if p == q:
        raise ValueError("p and q must be distinct")
    if M < n + 2:
        raise ValueError("M must be at least n + 2")
    N = p * q
    if N**n > io.table_cap(cap):
        raise TableTooLarge(f"(pq)^n = {N**n} exceeds the table cap")
    gp, sp = sum_table(F, p, cap=cap)
    gq, sq = sum_table(F, q, cap=cap)
    R = coordinates(N, n)
    qbar, pbar = pow(q, -1, p), pow(p, -1, q)
    A = np.abs(sp.data[((qbar * R) % p) @ (p ** np.arange(n))]) * np.abs(sq.data[((pbar * R) % q) @ (q ** np.arange(n))])

    U = math.ceil((N / B) * N**U_EXPONENT)
    while True:
        folded, tail = _folded_weights(N, B, M, U)
        kept = float(folded.sum())
        if (1.0 + tail / kept) ** n - 1.0 <= tolerance:
            break
        U *= 2
    weights = np.prod(folded[R], axis=1)
    T = (B / N) ** n * float(np.sum(A * weights))
    # bound on the omitted part of the full lattice sum
    tail_bound = T * ((1.0 + tail / kept) ** n - 1.0)

    W = Weight(B)
    ax = W.support_axis()
    X = coordinates(len(ax), n) + ax[0]
    wx = np.prod(W.psi(X / B), axis=1)
    direct = float(np.sum(wx * gp.data[(X % p) @ (p ** np.arange(n))] * gq.data[(X % q) @ (q ** np.arange(n))]))
    return BilinearReport(p, q, float(B), M, U, T, tail_bound, direct)


# exponent scan

def exponent_scan(F: Polynomial, B_list: Sequence[int], rho: float | None = None) -> dict:
    B_list = list(B_list)
    if any(b >= c for b, c in zip(B_list, B_list[1:])):
        raise ValueError("B_list must be strictly ascending")
    n = F.nvars
    rows = []
    for B in B_list:
        N = brute_count(F, B)
        rows.append({
            "B": B,
            "N": N,
            "N_over_B^(n-1)": N / B ** (n - 1),
            "N_over_B^(n-1+1/(n+1))": N / B ** (n - 1 + 1 / (n + 1)),
        })
    return {"polynomial": to_text(F), "n": n, "rho": rho, "rows": rows}
