"""Empirical stratification data: tier censuses of |S(u, p)|, second moments
over hyperplanes, d-th-power and discriminant censuses for the cyclic case,
and transport of hyperplanes under integer linear maps.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from thinset.errors import (
    DegenerateInX1,
    DiscriminantVanishes,
    OrderNotDividing,
    ScanTooLarge,
    SingularModP,
    ZeroNormal,
)
from thinset.expsum import GTable, SumTable, _dot_residues, coordinates, sum_table
from thinset.localcount import CensusReport, eval_box, grid_values
from thinset.polyring import Polynomial, reduce_mod, to_text
from thinset.primefield import (
    Character,
    det_bareiss,
    det_mod_p,
    is_dth_power,
    prime_ctx,
    resultant,
    trim,
)

DEFAULT_SCAN_CAP = 100_000
PILOT_RADIUS = 3


# exceptional primes

def _pilot_points(n: int, radius: int):
    """Integer points ordered by max-norm, then lexicographically."""
    pts = itertools.product(range(-radius, radius + 1), repeat=n)
    return sorted(pts, key=lambda x: (max((abs(v) for v in x), default=0), x))


def pilot_discriminant(F: Polynomial, radius: int = PILOT_RADIUS):
    """(x, Res_Y(F, dF/dY)(x)) at the first small integer point where the
    specialization keeps its Y-degree and the value is nonzero; None if
    there is no such point in the search box."""
    D = F.degree(0)
    if D < 1:
        return None
    coeffs = F.coeffs_in(0)
    for x in _pilot_points(F.nvars, radius):
        pt = (0,) + x
        f = [c.evaluate(pt) for c in coeffs]
        if f[-1] == 0:
            continue
        df = [i * f[i] for i in range(1, len(f))]
        r = resultant(f, df) if len(df) else 1
        if r:
            return x, r
    return None


def exceptional_reasons(F: Polynomial, p: int, pilot=None) -> list[str]:
    """Reasons p is treated as exceptional for F (empty if none)."""
    reasons = []
    if reduce_mod(F, p).degree_dropped:
        reasons.append("degree-drop")
    pilot = pilot_discriminant(F) if pilot is None else pilot
    if pilot is not None and pilot[1] % p == 0:
        reasons.append("pilot-discriminant")
    return reasons


# tier census

@dataclass
class StrataCensus:
    p: int
    n: int
    C: float
    thresholds: list[float]
    counts: list[int]
    ratios: list[float]
    polynomial: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def tier_census(s: SumTable, C: float) -> StrataCensus:
    """N_j = #{u : |S(u, p)| > C p^((n + j - 1) / 2)} for j = 0..n.

    Values within the table's error estimate of a threshold fall in the
    lower tier.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    p, n = s.p, s.n
    mags = s.magnitudes()
    tol = s.max_abs_error_estimate
    thresholds = [C * p ** ((n + j - 1) / 2) for j in range(n + 1)]
    counts = [int(np.count_nonzero(mags - T > tol)) for T in thresholds]
    ratios = [N * p**j / p**n for j, N in enumerate(counts)]
    poly = to_text(s.poly) if s.poly is not None else None
    return StrataCensus(p, n, float(C), thresholds, counts, ratios, poly)


def calibrate_C(F: Polynomial, pilots, cap: int | None = None) -> tuple[float, dict]:
    """(max over pilot primes and all u of |S(u, p)| / p^(n/2), per-prime maxima)."""
    per = {}
    for p in pilots:
        _, s = sum_table(F, p, cap=cap)
        per[p] = float(s.magnitudes().max() / p ** (s.n / 2))
    return max(per.values(), default=0.0), per


# hyperplane moments

@dataclass(frozen=True)
class Hyperplane:
    """{u : w . u = 0}; L, when present, is an integer n x n matrix whose
    first column is w."""

    w: tuple[int, ...]
    L: tuple[tuple[int, ...], ...] | None = None
    verified: bool = False

    def normalized(self, p: int) -> tuple[int, ...]:
        """w scaled so that its first nonzero entry is 1 mod p."""
        w = [x % p for x in self.w]
        k = next((i for i, x in enumerate(w) if x), None)
        if k is None:
            raise ZeroNormal(f"w vanishes mod {p}")
        inv = pow(w[k], -1, p)
        return tuple(x * inv % p for x in w)

    def to_dict(self) -> dict:
        return {"w": list(self.w), "L": [list(r) for r in self.L] if self.L else None, "verified": self.verified}


@dataclass
class MomentReport:
    p: int
    hyperplane: Hyperplane
    moment: float
    exact_integer: int
    ratio: float
    exceptional: bool
    rel_err: float = field(init=False)

    def __post_init__(self):
        if self.exact_integer > 0:
            self.rel_err = abs(self.moment - self.exact_integer) / self.exact_integer
        else:
            self.rel_err = abs(self.moment)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hyperplane"] = self.hyperplane.to_dict()
        return d


def autocorrelation_moment(g: GTable, w) -> int:
    """p^(n-1) sum_x sum_t g(x) g(x + t w), as an exact integer.

    The double sum equals the sum over lines parallel to w of the squared
    line sums of g.
    """
    p, n = g.p, g.n
    w = Hyperplane(tuple(w)).normalized(p)
    k = next(i for i, x in enumerate(w) if x)
    X = coordinates(p, n)
    base = (X - np.outer(X[:, k], w)) % p
    line = base @ (p ** np.arange(n, dtype=np.int64))
    sums = np.zeros(p**n, dtype=np.int64)
    np.add.at(sums, line, g.data)
    total = int(np.sum(sums.astype(object) ** 2)) if sums.size else 0
    return p ** (n - 1) * total


def hyperplane_moment(g: GTable, s: SumTable, h: Hyperplane, exceptional: bool | None = None) -> MomentReport:
    p, n = g.p, g.n
    w = h.normalized(p)
    mask = _dot_residues(w, p, n) == 0
    moment = float(np.sum(np.abs(s.data[mask]) ** 2))
    exact = autocorrelation_moment(g, w)
    if exceptional is None:
        exceptional = bool(g.poly is not None and exceptional_reasons(g.poly, p))
    ratio = moment / p ** (2 * n - 1)
    return MomentReport(p, h, moment, exact, ratio, bool(exceptional))


def projective_points(p: int, n: int):
    """Representatives of P^(n-1)(F_p) with first nonzero entry 1."""
    for k in range(n):
        for tail in itertools.product(range(p), repeat=n - k - 1):
            yield (0,) * k + (1,) + tail


def all_hyperplanes_scan(g: GTable, s: SumTable, cap: int = DEFAULT_SCAN_CAP) -> list[MomentReport]:
    p, n = g.p, g.n
    count = (p**n - 1) // (p - 1)
    if count > cap:
        raise ScanTooLarge(f"{count} hyperplanes exceed the scan cap {cap}")
    exceptional = bool(g.poly is not None and exceptional_reasons(g.poly, p))
    reports = [hyperplane_moment(g, s, Hyperplane(w), exceptional) for w in projective_points(p, n)]
    reports.sort(key=lambda r: -r.ratio)
    return reports


def transport(h: Hyperplane, p: int) -> Hyperplane:
    """Check {u : (L^T u)_1 = 0} = {u : w . u = 0} over F_p."""
    if h.L is None:
        raise ValueError("hyperplane carries no transport matrix")
    n = len(h.w)
    L = [list(r) for r in h.L]
    if det_mod_p(L, p) == 0:
        raise SingularModP(f"p={p} divides det L = {det_bareiss(L)}")
    col = [L[i][0] % p for i in range(n)]
    w = [x % p for x in h.w]
    if not any(w):
        raise ZeroNormal(f"w vanishes mod {p}")
    if p <= 13:
        for u in itertools.product(range(p), repeat=n):
            a = sum(c * x for c, x in zip(col, u)) % p == 0
            b = sum(c * x for c, x in zip(w, u)) % p == 0
            if a != b:
                raise ValueError(f"transport fails at u={u}")
    else:
        # both are kernels of one linear form; equal iff the forms are proportional
        M = [col, w]
        rank2 = any((M[0][i] * M[1][j] - M[0][j] * M[1][i]) % p for i in range(n) for j in range(n))
        if rank2:
            raise ValueError("first column of L is not proportional to w")
    return Hyperplane(h.w, h.L, True)


# cyclic case

def x1_discriminant(H: Polynomial) -> Polynomial:
    """Res_X1(H, dH/dX1), without dividing by the leading coefficient."""
    k = H.degree(1)
    if k < 1:
        raise DegenerateInX1("H does not involve X1")
    a = H.coeffs_in(1)
    b = H.derivative(1).coeffs_in(1)
    if k == 1:
        # Res(a0 + a1 X, a1) = a1
        return b[0]
    r = resultant(a, b)
    return r if isinstance(r, Polynomial) else Polynomial.const(r, H.nvars)


def _t_grid(H: Polynomial, P: Polynomial, p: int) -> np.ndarray:
    """Values of an X1-free P mod p over t in F_p^(n-1), x2 fastest."""
    axes = [np.array([0])] + [np.arange(p)] * (H.nvars - 1)
    return eval_box(P, p, axes).reshape(-1)


def dth_power_count(H: Polynomial, d: int, p: int) -> int:
    """#{t : H(X1, t) is a d-th power in F_p[X1]}; the zero polynomial counts."""
    if H.degree(1) < 1:
        raise DegenerateInX1("H does not involve X1")
    rows = np.stack([_t_grid(H, c, p) for c in H.coeffs_in(1)], axis=1)
    count = 0
    for row in rows:
        f = trim(row.tolist(), p)
        if not f or is_dth_power(f, d, p):
            count += 1
    return count


@dataclass
class _Specializations:
    p: int
    k: int
    delta: np.ndarray  # Delta(t) mod p
    tpoints: np.ndarray  # (t, n - 1)
    delta_poly: Polynomial


def _specialize_grid(H: Polynomial, p: int) -> _Specializations:
    n = H.nvars
    delta = x1_discriminant(H)
    red = reduce_mod(delta, p)
    if red.is_zero():
        raise DiscriminantVanishes(f"discriminant vanishes identically mod {p}")
    dvals = _t_grid(H, delta, p)
    tpts = coordinates(p, n - 1) if n > 1 else np.zeros((1, 0), dtype=np.int64)
    return _Specializations(p, H.degree(1), dvals, tpts, delta)


def cyclic_dichotomy_census(H: Polynomial, d: int, p: int) -> tuple[CensusReport, CensusReport]:
    """(census A, census B): A counts t with H(X1, t) a d-th power over F_p
    (bounded by B's count), B counts t with Delta(t) = 0 (bounded by
    deg Delta p^(n-2))."""
    if (p - 1) % d:
        raise OrderNotDividing(f"d={d} does not divide p-1={p - 1}")
    sp = _specialize_grid(H, p)
    n = H.nvars
    zero_t = sp.delta == 0
    B_count = int(zero_t.sum())
    deg = reduce_mod(sp.delta_poly, p).poly.total_degree()
    census_B = CensusReport(
        description=f"t with Res_X1(H, dH/dX1)(t) = 0 mod {p}",
        count=B_count,
        bound=deg * float(p) ** (n - 2),
        details={"p": p, "n": n, "deg_delta": deg, "delta": to_text(sp.delta_poly)},
    )
    A_count = dth_power_count(H, d, p)
    census_A = CensusReport(
        description=f"t with H(X1, t) a perfect power of order {d} mod {p}",
        count=A_count,
        bound=B_count,
        details={"p": p, "n": n, "d": d},
    )
    return census_A, census_B


@dataclass
class WeilReport:
    p: int
    d: int
    max_ratio: float
    bound: int
    worst_t: list[int] | None
    slots: int
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.max_ratio <= self.bound + 1e-6

    def to_dict(self) -> dict:
        return asdict(self)


def weil_census(H: Polynomial, d: int, p: int, chi: Character | None = None) -> WeilReport:
    """max over t with Delta(t) != 0 of |sum_x1 chi(H(x1, t))| / sqrt(p)."""
    chi = chi if chi is not None else Character(prime_ctx(p), d, 1)
    if chi.ctx.p != p:
        raise ValueError("character is over a different prime")
    sp = _specialize_grid(H, p)
    vals = grid_values(H, p, H.nvars).reshape(-1, p)  # rows: t, columns: x1
    sums = np.abs(chi.values()[vals].sum(axis=1)) / np.sqrt(p)
    good = sp.delta != 0
    if not good.any():
        return WeilReport(p, d, 0.0, sp.k - 1, None, 0)
    i = int(np.argmax(np.where(good, sums, -1.0)))
    return WeilReport(p, d, float(sums[i]), sp.k - 1, sp.tpoints[i].tolist(), int(good.sum()))
