import itertools
import math

import pytest

from oracles import g_brute, points_brute
from thinset.errors import DiscriminantVanishes, OrderNotDividing, ScanTooLarge, SingularModP, ZeroNormal
from thinset.expsum import sum_table
from thinset.fixtures import get_fixture, list_fixtures
from thinset.polyring import parse
from thinset.primefield import Character, prime_ctx, primes_between
from thinset.strata import (
    Hyperplane,
    all_hyperplanes_scan,
    autocorrelation_moment,
    calibrate_C,
    cyclic_dichotomy_census,
    dth_power_count,
    exceptional_reasons,
    hyperplane_moment,
    pilot_discriminant,
    projective_points,
    tier_census,
    transport,
    weil_census,
    x1_discriminant,
)

FIXTURES = list_fixtures()


def test_tier_census_sharp_example():
    _, s = sum_table(parse("Y^2 - X1"), 5)
    r = tier_census(s, 1.0)
    # every u != 0 has |S| = sqrt(5): above the tier-0 threshold 1, not above sqrt(5)
    assert r.counts == [4, 0]
    assert r.thresholds == pytest.approx([1.0, math.sqrt(5)])


def test_tier_census_matches_direct_count():
    F = parse("Y^3 - X1^2*X2 - X2^3")
    g = g_brute(F, 7)
    _, s = sum_table(F, 7)
    mags = []
    for u in itertools.product(range(7), repeat=2):
        z = sum(gx * complex(math.cos(2 * math.pi * (u[0] * x[0] + u[1] * x[1]) / 7), math.sin(2 * math.pi * (u[0] * x[0] + u[1] * x[1]) / 7)) for x, gx in g.items())
        mags.append(abs(z))
    for C in (0.5, 1.3, 2.0):
        r = tier_census(s, C)
        for j, T in enumerate(r.thresholds):
            assert r.counts[j] == sum(1 for m in mags if m > T + 1e-9)
        assert all(a >= b for a, b in zip(r.counts, r.counts[1:]))
    with pytest.raises(ValueError):
        tier_census(s, 0)


def test_calibrate_C():
    C, per = calibrate_C(parse("Y^2 - X1"), [5, 7])
    assert set(per) == {5, 7}
    assert C == pytest.approx(1.0)


def test_moment_example():
    F = parse("Y^2 - X1", 2)
    g, s = sum_table(F, 5)
    r = hyperplane_moment(g, s, Hyperplane((0, 1)))
    assert r.exact_integer == 500
    assert r.moment == pytest.approx(500, rel=1e-12)
    assert r.ratio == pytest.approx(500 / 5**3)


def _autocorr_loop(F, p, w):
    g = g_brute(F, p)
    n = F.nvars
    total = 0
    for x, gx in g.items():
        for t in range(p):
            y = tuple((a + t * b) % p for a, b in zip(x, w))
            total += gx * g[y]
    return p ** (n - 1) * total


@pytest.mark.parametrize("fid", ["diag-4-3", "cyclic-3", "weighted-m2"])
def test_autocorrelation_matches_double_loop(fid):
    F = get_fixture(fid).poly()
    p = 7 if F.nvars == 3 else 11
    g, s = sum_table(F, p)
    ws = [(1,) + (0,) * (F.nvars - 1), (0,) * (F.nvars - 1) + (1,), (1,) * F.nvars, (2, 5, 3)[: F.nvars]]
    for w in ws:
        exact = _autocorr_loop(F, p, w)
        assert autocorrelation_moment(g, w) == exact
        assert abs(hyperplane_moment(g, s, Hyperplane(w)).moment - exact) <= 1e-9 * max(exact, 1)


def test_autocorrelation_is_scale_invariant():
    F = get_fixture("cyclic-2").poly()
    g, _ = sum_table(F, 13)
    for a in range(2, 13):
        assert autocorrelation_moment(g, (a, 3 * a)) == autocorrelation_moment(g, (1, 3))


def test_zero_normal():
    g, s = sum_table(parse("Y^2 - X1 - X2"), 5)
    with pytest.raises(ZeroNormal):
        hyperplane_moment(g, s, Hyperplane((5, 10)))


def test_projective_points_count():
    for p, n in [(2, 2), (5, 2), (3, 3), (7, 3)]:
        pts = list(projective_points(p, n))
        assert len(pts) == (p**n - 1) // (p - 1) == len(set(pts))


def test_scan_sharp_peaks_off_the_x1_axis():
    F = parse("Y^2 - X1", 2)
    g, s = sum_table(F, 7)
    reports = all_hyperplanes_scan(g, s)
    assert len(reports) == 8
    assert reports[0].hyperplane.w == (0, 1)
    assert all(r.rel_err < 1e-9 for r in reports)


def test_scan_linear_degenerate_symmetry():
    # Y^2 - X1 - X2 depends on X1 + X2 only; swapping coordinates fixes it
    g, s = sum_table(get_fixture("linear-degenerate").poly(), 11)
    by_w = {r.hyperplane.w: r.exact_integer for r in all_hyperplanes_scan(g, s)}
    for b in range(2, 11):
        binv = pow(b, -1, 11)
        assert by_w[(1, b)] == by_w[(1, binv)]
    assert max(by_w, key=by_w.get) == (1, 10)


def test_scan_cap():
    g, s = sum_table(get_fixture("diag-4-3").poly(), 7)
    with pytest.raises(ScanTooLarge):
        all_hyperplanes_scan(g, s, cap=10)


def test_exceptional_reasons():
    F = parse("Y^2 - X1")
    x, v = pilot_discriminant(F)
    # x = 0 gives Res = 0; -1 precedes 1 lexicographically
    assert x == (-1,) and v == 4
    assert exceptional_reasons(F, 2) == ["pilot-discriminant"]
    assert exceptional_reasons(F, 3) == []
    assert exceptional_reasons(parse("5*Y^2 - X1"), 5) == ["degree-drop", "pilot-discriminant"]


def test_transport_identity_and_example():
    h = Hyperplane((1, 0), ((1, 0), (0, 1)))
    assert transport(h, 7).verified
    h = Hyperplane((1, 1), ((1, 0), (1, 1)))
    for p in (5, 7, 17, 31):
        assert transport(h, p).verified
    with pytest.raises(ValueError):
        transport(Hyperplane((1, 2), ((1, 0), (1, 1))), 7)
    with pytest.raises(ValueError):
        transport(Hyperplane((1, 2), ((1, 0), (1, 1))), 17)
    with pytest.raises(SingularModP):
        transport(Hyperplane((2, 0), ((2, 0), (0, 1))), 2)


def test_transport_moment_equivalence():
    # sum over u1 = 0 for F(Y, L X) equals the sum over w . u = 0 for F, w = first column of L
    L = [[1, 0], [1, 1]]
    F = parse("Y^3 - X1^2*X2 - X2^3")
    G = F.substitute_linear(L)
    w = tuple(row[0] for row in L)
    for p in (7, 13):
        gG, sG = sum_table(G, p)
        gF, sF = sum_table(F, p)
        a = hyperplane_moment(gG, sG, Hyperplane((1, 0)))
        b = hyperplane_moment(gF, sF, Hyperplane(w, tuple(map(tuple, L))))
        assert a.exact_integer == b.exact_integer
        assert transport(Hyperplane(w, tuple(map(tuple, L))), p).verified


def test_x1_discriminant_examples():
    assert x1_discriminant(parse("X1^3 + X2")) == parse("27*X2^2", 2)
    assert x1_discriminant(parse("X1^2*X2 + X2^3")) == parse("4*X2^5", 2)
    assert x1_discriminant(parse("X1^2*X2")).is_zero()
    assert x1_discriminant(parse("3*X1 + X2")) == parse("3", 2)


def test_dichotomy_zero_discriminant_form():
    assert dth_power_count(parse("X1^2*X2"), 2, 5) == 3
    with pytest.raises(DiscriminantVanishes):
        cyclic_dichotomy_census(parse("X1^2*X2"), 2, 5)


def test_dichotomy_examples():
    A, B = cyclic_dichotomy_census(parse("X1"), 2, 7)
    assert (A.count, B.count) == (0, 0)
    A, B = cyclic_dichotomy_census(parse("X1^3 + X2"), 3, 7)
    assert B.count == 1 and B.bound == 2
    assert A.count <= B.count
    with pytest.raises(OrderNotDividing):
        cyclic_dichotomy_census(parse("X1^3 + X2"), 3, 5)


@pytest.mark.parametrize("text", ["X1^3 + X2", "X1^2*X2 + X2^3"])
def test_dichotomy_b_matches_loop(text):
    H = parse(text)
    delta = x1_discriminant(H)
    for p in (7, 13, 19):
        _, B = cyclic_dichotomy_census(H, 3, p)
        assert B.count == sum(1 for t in range(p) if delta.evaluate((0, 0, t), p) == 0)


def test_weil_examples():
    assert weil_census(parse("X1"), 2, 5).max_ratio < 1e-12
    r = weil_census(parse("X1^2 + 1", 1), 2, 13)
    assert r.max_ratio <= 1 + 1e-9 and r.passed
    r = weil_census(parse("X1^3 + X2"), 2, 11)
    assert r.max_ratio <= 2 + 1e-6 and r.bound == 2


def test_weil_matches_loop():
    H = parse("X1^2*X2 + X2^3")
    p = 13
    r = weil_census(H, 3, p)
    chi = Character(prime_ctx(p), 3, 1)
    best = 0.0
    for t in range(p):
        if x1_discriminant(H).evaluate((0, 0, t), p) == 0:
            continue
        best = max(best, abs(sum(chi(H.evaluate((0, x, t), p)) for x in range(p))) / math.sqrt(p))
    assert r.max_ratio == pytest.approx(best, abs=1e-12)


def test_diag_4_3_moment_within_genus_bound():
    # |N - p| <= 6 sqrt(p) on each fibre curve y^4 = x^3 + c bounds the ratio by 36
    F = get_fixture("diag-4-3").poly()
    pilot = pilot_discriminant(F)
    for p in primes_between(5, 31):
        if exceptional_reasons(F, p, pilot):
            continue
        g, s = sum_table(F, p)
        r = hyperplane_moment(g, s, Hyperplane((1, 0, 0)), exceptional=False)
        assert r.rel_err < 1e-9
        assert r.ratio <= 36


def test_zero_frequency_against_points():
    F = get_fixture("cyclic-2").poly()
    for p in (5, 7):
        g, s = sum_table(F, p)
        assert round(s.at([0, 0]).real) == points_brute(F, p) - p * p


@pytest.mark.parametrize("fx", [f for f in FIXTURES if f.id != "diag-4-2"], ids=lambda f: f.id)
def test_tier_decay_on_remaining_fixtures(fx):
    F = fx.poly()
    n = F.nvars
    C0, _ = calibrate_C(F, [7, 11, 13])
    pilot = pilot_discriminant(F)
    for p in primes_between(2, 31):
        if exceptional_reasons(F, p, pilot):
            continue
        _, s = sum_table(F, p)
        assert tier_census(s, C0).counts[1] <= 4 * p ** (n - 1)
