"""Catalog of example polynomials used by the CLI and the test suite."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from thinset.polyring import Polynomial, decompose_sieved_form, parse


@dataclass(frozen=True)
class Fixture:
    id: str
    text: str
    n: int
    m: int
    d: int
    note: str

    def poly(self) -> Polynomial:
        return parse(self.text, self.n)

    def to_dict(self) -> dict:
        return asdict(self)


CATALOG: dict[str, Fixture] = {
    f.id: f
    for f in [
        Fixture("sharp", "Y^2 - X1", 2, 2, 1, "x1 is a square: about B^(n-1/2) solvable points"),
        Fixture("diag-4-2", "Y^4 - X1^2 - X2^2", 2, 2, 2, "diagonal family Y^d - sum X_j^k_j"),
        Fixture("diag-4-3", "Y^4 - X1^3 - X2^3 - X3^3", 3, 2, 2, "diagonal family, strongly allowable"),
        Fixture("cyclic-3", "Y^3 - X1^2*X2 - X2^3", 2, 3, 1, "cyclic cover Y^d = H with H a binary cubic form"),
        Fixture("cyclic-2", "Y^2 - X1^3 - X2", 2, 2, 1, "cyclic cover Y^2 = H, H not a form"),
        Fixture("weighted-m2", "Y^4 + X1*Y^2 - X2^3 - 2", 2, 2, 2, "weighted form Y^(md) + sum Y^(m(d-j)) f_j with m = 2"),
        Fixture(
            "composita-2-3",
            "Y^6 - 3*X1*Y^4 + (3*X1^2 - 6*X1^2*X2)*Y^2 - X1^3*(1 + X2)*(1 + X2)",
            2,
            2,
            3,
            "minimal polynomial of sqrt(X1)(1 + X2^(1/3)); genuine but not strongly so",
        ),
        Fixture("linear-degenerate", "Y^2 - X1 - X2", 2, 2, 1, "depends on one linear form only"),
    ]
}


def list_fixtures() -> list[Fixture]:
    return list(CATALOG.values())


def get_fixture(fid: str, n: int | None = None) -> Fixture:
    """Look up a fixture; only 'sharp' accepts a different n."""
    if fid not in CATALOG:
        raise KeyError(f"unknown fixture {fid!r}")
    f = CATALOG[fid]
    if n is not None and n != f.n:
        if fid != "sharp":
            raise ValueError(f"fixture {fid!r} has fixed n={f.n}")
        if n < 1:
            raise ValueError("n must be positive")
        f = Fixture(f.id, f.text, n, f.m, f.d, f.note)
    return f


def self_check() -> list[str]:
    """Ids of fixtures that fail to parse or to decompose with their m."""
    bad = []
    for f in CATALOG.values():
        try:
            form = decompose_sieved_form(f.poly(), f.m)
            if form.d != f.d:
                bad.append(f.id)
        except ValueError:
            bad.append(f.id)
    return bad
