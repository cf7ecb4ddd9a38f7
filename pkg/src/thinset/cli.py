"""Command-line entry point.

Every command prints (or writes to --out) a JSON document carrying
"schema": "thinset/v1", or CSV with a header row.  With --out a run
manifest is written next to the output as <out>.manifest.json.

Exit codes: 0 success, 2 usage error, 3 computation error.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from thinset import __version__, io
from thinset.errors import ParseError, ThinsetError
from thinset.expsum import SumTable, residue_histogram, sum_table
from thinset.fixtures import get_fixture, list_fixtures
from thinset.localcount import point_count, zero_census
from thinset.polyring import Polynomial, parse, to_text
from thinset.sieve import bilinear_term, brute_count, exponent_scan, sieve_rhs
from thinset.strata import (
    Hyperplane,
    all_hyperplanes_scan,
    calibrate_C,
    cyclic_dichotomy_census,
    hyperplane_moment,
    tier_census,
    weil_census,
)


class UsageError(Exception):
    pass


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _poly(args) -> tuple[Polynomial, str | None]:
    if args.fixture:
        try:
            fx = get_fixture(args.fixture, args.n)
        except (KeyError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        return fx.poly(), fx.id
    if not args.poly:
        raise UsageError("give --poly or --fixture")
    try:
        return parse(args.poly, args.n), None
    except ParseError as exc:
        raise UsageError(f"bad polynomial: {exc}") from None


def _pmap(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _scalar_row(d: dict) -> dict:
    return {k: v for k, v in d.items() if not isinstance(v, (dict, list))}


# commands: each returns (json payload, csv rows)

def cmd_count(args, F):
    N = brute_count(F, args.B)
    out = {"N": N, "B": args.B, "n": F.nvars}
    if args.p:
        cnt, ratio = point_count(F, args.p, args.table_cap)
        out.update({"p": args.p, "points_mod_p": cnt, "normalized_error": ratio})
    return out, [out]


def cmd_expsum(args, F):
    if not args.p:
        raise UsageError("expsum needs --p")
    g, s = sum_table(F, args.p, method=args.method, cap=args.table_cap)
    out = {"p": s.p, "n": s.n, "method": s.method, "error_estimate": s.max_abs_error_estimate, "zero_frequency": g.total()}
    if args.export:
        out["export"] = s.export(args.export)
    if args.all:
        rows = _sum_rows(s)
        out["table"] = rows
        return out, rows
    if args.u is None:
        raise UsageError("expsum needs --u or --all")
    u = _ints(args.u)
    if len(u) != F.nvars:
        raise UsageError(f"--u needs {F.nvars} entries")
    h = residue_histogram(g, u)
    val = h.evaluate()
    row = {"u": list(h.u), "re": val.real, "im": val.imag, "abs": abs(val), "table_abs": abs(s.at(u))}
    out.update(row)
    out["histogram"] = h.a.tolist()
    return out, [dict(row, u=" ".join(map(str, h.u)))]


def _sum_rows(s: SumTable) -> list[dict]:
    rows = []
    idx = np.arange(s.p**s.n)
    for k in idx:
        u = [int(k // s.p**i % s.p) for i in range(s.n)]
        z = complex(s.data[k])
        rows.append({"u": " ".join(map(str, u)), "re": z.real, "im": z.imag, "abs": abs(z)})
    return rows


def cmd_moment(args, F):
    if not args.p:
        raise UsageError("moment needs --p")
    g, s = sum_table(F, args.p, cap=args.table_cap)
    if args.scan:
        reports = [r.to_dict() for r in all_hyperplanes_scan(g, s)]
        rows = [dict(_scalar_row(r), w=" ".join(map(str, r["hyperplane"]["w"]))) for r in reports]
        return {"p": args.p, "reports": reports}, rows
    if not args.w:
        raise UsageError("moment needs --w or --scan")
    w = _ints(args.w)
    if len(w) != F.nvars:
        raise UsageError(f"--w needs {F.nvars} entries")
    r = hyperplane_moment(g, s, Hyperplane(tuple(w))).to_dict()
    return r, [dict(_scalar_row(r), w=args.w)]


def cmd_strata(args, F):
    primes = _ints(args.p_list or (str(args.p) if args.p else ""))
    if not primes:
        raise UsageError("strata needs --p or --p-list")
    C, calib = args.C, None
    if args.calibrate:
        C, per = calibrate_C(F, _ints(args.calibrate), args.table_cap)
        calib = {"pilots": per, "C": C}

    def one(p):
        _, s = sum_table(F, p, cap=args.table_cap)
        return tier_census(s, C).to_dict()

    censuses = _pmap(one, primes, args.threads)
    rows = []
    for c in censuses:
        for j, (N, T, r) in enumerate(zip(c["counts"], c["thresholds"], c["ratios"])):
            rows.append({"p": c["p"], "j": j, "threshold": T, "N": N, "ratio": r})
    return {"C": C, "calibration": calib, "censuses": censuses}, rows


def cmd_census(args, F):
    if not args.p:
        raise UsageError("census needs --p")
    kind = args.kind
    if kind == "zero":
        lo, hi = (args.lo or 0), (args.hi if args.hi is not None else args.p)
        r = zero_census(F, args.p, (lo, hi)).to_dict()
        return r, [_scalar_row(r)]
    if F.depends_on(0):
        raise UsageError("the cyclic censuses take H in X1..Xn without Y")
    if not args.d:
        raise UsageError(f"census --kind {kind} needs --d")
    if kind == "dichotomy":
        A, B = cyclic_dichotomy_census(F, args.d, args.p)
        out = {"A": A.to_dict(), "B": B.to_dict()}
        return out, [dict(_scalar_row(A.to_dict()), census="A"), dict(_scalar_row(B.to_dict()), census="B")]
    r = weil_census(F, args.d, args.p).to_dict()
    return r, [_scalar_row(r)]


def cmd_sieve(args, F):
    if args.B is None:
        raise UsageError("sieve needs --B")
    r = sieve_rhs(
        F,
        args.B,
        P=args.P,
        m=args.m,
        rho=args.rho,
        pair_budget=args.pair_budget,
        seed=args.seed,
    ).to_dict()
    return r, [_scalar_row(r)]


def cmd_bilinear(args, F):
    if None in (args.B, args.p, args.q):
        raise UsageError("bilinear needs --B, --p and --q")
    M = args.M if args.M is not None else F.nvars + 2
    r = bilinear_term(F, args.B, args.p, args.q, M, cap=args.table_cap).to_dict()
    return r, [r]


def cmd_scan(args, F):
    r = exponent_scan(F, _ints(args.B_list or ""), args.rho)
    return r, r["rows"]


def cmd_fixtures(args, F):
    rows = [f.to_dict() for f in list_fixtures()]
    return {"fixtures": rows}, rows


COMMANDS = {
    "count": cmd_count,
    "expsum": cmd_expsum,
    "moment": cmd_moment,
    "strata": cmd_strata,
    "census": cmd_census,
    "sieve": cmd_sieve,
    "bilinear": cmd_bilinear,
    "scan-exponent": cmd_scan,
    "fixtures": cmd_fixtures,
}


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags; suppressed defaults there keep
    # values given before the subcommand
    def dflt(v):
        return argparse.SUPPRESS if suppress else v

    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--format", choices=["json", "csv"], default=dflt("json"))
    g.add_argument("--out", default=dflt(None), help="write output here (atomically) plus a manifest")
    g.add_argument("--threads", type=int, default=dflt(1))
    g.add_argument("--seed", type=int, default=dflt(0))
    g.add_argument("--table-cap", type=int, default=dflt(None), help="max table entries")
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(True)
    src = argparse.ArgumentParser(add_help=False)
    src.add_argument("--poly", help="polynomial text in Y, X1..Xn")
    src.add_argument("--fixture", help="fixture id (see the fixtures command)")
    src.add_argument("--n", type=int, default=None, help="number of X variables")

    ap = argparse.ArgumentParser(prog="thinset", description=__doc__.splitlines()[0], parents=[_global_flags(False)])
    ap.add_argument("--version", action="version", version=f"thinset {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", parents=[common, src], help="exact N(F, B)")
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--p", type=int, help="also count points mod p")

    p = sub.add_parser("expsum", parents=[common, src], help="exponential sums S(u, p)")
    p.add_argument("--p", type=int)
    p.add_argument("--u", help="frequency, e.g. 1,2")
    p.add_argument("--all", action="store_true", help="full table")
    p.add_argument("--method", choices=["naive", "chirp"])
    p.add_argument("--export", help="raw table path")

    p = sub.add_parser("moment", parents=[common, src], help="second moment over a hyperplane")
    p.add_argument("--p", type=int)
    p.add_argument("--w", help="normal vector, e.g. 0,1")
    p.add_argument("--scan", action="store_true", help="all hyperplanes")

    p = sub.add_parser("strata", parents=[common, src], help="tier census of |S(u, p)|")
    p.add_argument("--p", type=int)
    p.add_argument("--p-list", help="primes, e.g. 17,19,23")
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--calibrate", help="pilot primes for C")

    p = sub.add_parser("census", parents=[common, src], help="dichotomy, Weil or zero census")
    p.add_argument("--kind", choices=["dichotomy", "weil", "zero"], default="dichotomy")
    p.add_argument("--p", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--lo", type=int)
    p.add_argument("--hi", type=int)

    p = sub.add_parser("sieve", parents=[common, src], help="sieve right-hand side")
    p.add_argument("--B", type=int)
    p.add_argument("--P", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--pair-budget", type=int, default=200)

    p = sub.add_parser("bilinear", parents=[common, src], help="bilinear term T(p, q; B)")
    p.add_argument("--B", type=float)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--M", type=int)

    p = sub.add_parser("scan-exponent", parents=[common, src], help="N(F, B) over several B")
    p.add_argument("--B-list", help="ascending, e.g. 10,20,40")
    p.add_argument("--rho", type=float)

    sub.add_parser("fixtures", parents=[common], help="list the fixture catalog")
    return ap


def render(payload: dict, rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return io.dumps(payload)
    buf = _stdio.StringIO()
    keys: list[str] = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _csv_cell(v) for k, v in r.items()})
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (list, tuple)):
        return " ".join(map(str, v))
    return v


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    saved_cap = os.environ.get("THINSET_TABLE_CAP")
    try:
        F, fid = (None, None) if args.command == "fixtures" else _poly(args)
        if args.table_cap is not None:
            if args.table_cap < 1:
                raise UsageError("--table-cap must be positive")
            # reaches every table builder, including ones called indirectly
            os.environ["THINSET_TABLE_CAP"] = str(args.table_cap)
        result, rows = COMMANDS[args.command](args, F)
    except UsageError as exc:
        print(f"thinset {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ThinsetError as exc:
        print(f"thinset {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"thinset {args.command}: error: {exc}", file=sys.stderr)
        return 2
    finally:
        if saved_cap is None:
            os.environ.pop("THINSET_TABLE_CAP", None)
        else:
            os.environ["THINSET_TABLE_CAP"] = saved_cap
    payload = {"schema": io.SCHEMA, "command": args.command}
    if F is not None:
        payload["polynomial"] = to_text(F)
        payload["fixture"] = fid
    payload.update(result)
    text = render(payload, rows, args.format)
    if not args.out:
        sys.stdout.write(text)
        return 0
    io.atomic_write(args.out, text)
    config = {k: v for k, v in vars(args).items() if k not in ("out",)}
    manifest = {
        "schema": io.SCHEMA,
        "argv": argv,
        "config": config,
        "polynomial": to_text(F) if F is not None else None,
        "fixture": fid,
        "seed": args.seed,
        "version": __version__,
        "wall_time": time.perf_counter() - start,
        "outputs": {args.out: io.sha256(text.encode("utf-8"))},
    }
    io.atomic_write(args.out + ".manifest.json", io.dumps(manifest))
    return 0


if __name__ == "__main__":
    sys.exit(main())
