"""Command-line front end: build, verify, inspect, and export representations.

Exit codes are the machine contract: 0 success, 1 verification failure,
2 invalid configuration, 3 unresolved divergence.  Everything on stdout is
for humans.
"""

from __future__ import annotations

import argparse
import os
import sys

from .atypical import UnresolvedDivergence, build_atypical_sl3
from .genrep import DivergentElement, NotFlat, build_flat_sl3, build_generic_rep
from .gzbasis import (EmptyModule, TopRow, cartan_exponent, enumerate_basis,
                      generic_dimension, weight_table)
from .io import (build_document, csv_triplets, document_to_generator_set,
                 dumps_canonical, load_document)
from .qarith import EvenOrderUnsupported, QPoint, UnityOrder, q_from_order
from .verify import full_report

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_DIVERGENT = 0, 1, 2, 3


def _parse_top(text: str) -> TopRow:
    values = [int(v) for v in text.split(",") if v.strip() != ""]
    if values and values[-1] != 0:
        values.append(0)
    return TopRow(tuple(values))


def _tolerance(args) -> float:
    if getattr(args, "tol", None) is not None:
        return args.tol
    env = os.environ.get("GZROOTS_TOL")
    return float(env) if env else 1e-9


def _build_from_args(args):
    top = _parse_top(args.top)
    if args.convention == "generic":
        if args.m is not None:
            q = q_from_order(UnityOrder(args.m))
        else:
            q = QPoint.generic(args.generic_angle)
        return build_generic_rep(top, q)
    if args.m is None:
        raise ValueError(f"convention {args.convention!r} requires --m")
    if args.convention == "flat":
        return build_flat_sl3(top, UnityOrder(args.m))
    if args.convention == "atypical":
        return build_atypical_sl3(top, UnityOrder(args.m))
    raise ValueError(f"unknown convention {args.convention!r}")


def _write(path, text):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_dim(args) -> int:
    print(generic_dimension(_parse_top(args.top)))
    return EXIT_OK


def cmd_enumerate(args) -> int:
    basis = enumerate_basis(_parse_top(args.top))
    for p in basis:
        print(p)
    if args.weights:
        print()
        print("cartan exponent vector : multiplicity")
        for exps, mult in sorted(weight_table(basis).items(), reverse=True):
            print(f"  {list(exps)} : {mult}")
    return EXIT_OK


def cmd_build(args) -> int:
    g = _build_from_args(args)
    tol = _tolerance(args)
    report = {"verification": full_report(g, tol=tol).to_dict(), "build": g.meta}
    doc = build_document(g, report)
    if args.format == "csv":
        _write(args.out, csv_triplets(g))
    else:
        _write(args.out, dumps_canonical(doc))
    print(f"built {g.convention} module of dimension {g.dimension}"
          + (f" -> {args.out}" if args.out else ""), file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.infile:
        with open(args.infile) as fh:
            g = document_to_generator_set(load_document(fh.read()))
    else:
        g = _build_from_args(args)
    tol = _tolerance(args)
    rep = full_report(g, tol=tol)
    print(f"dimension {g.dimension}, convention {g.convention}")
    for name, value in sorted(rep.residuals.items()):
        status = "ok" if value <= tol else "FAIL"
        print(f"  {name:28s} {value:9.2e}  {status}")
    print(f"singular vectors: {len(rep.singular_vectors)}; "
          f"invariant closures: {rep.invariant_dims}")
    print("PASSED" if rep.passed else "FAILED")
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_export(args) -> int:
    with open(args.infile) as fh:
        doc = load_document(fh.read())
    if args.format == "csv":
        _write(args.out, csv_triplets(document_to_generator_set(doc)))
    else:
        _write(args.out, dumps_canonical(doc))
    return EXIT_OK


_SCENARIOS = {
    "flat-7": dict(top=(4, 2, 0), m=3, builder="flat", dims={7, 1}, rel_tol=1e-9),
    "flat-18": dict(top=(6, 2, 0), m=5, builder="flat", contains=18, rel_tol=1e-8),
    "atypical-15": dict(top=(5, 2, 0), m=3, builder="atypical", dims={15},
                        rel_tol=1e-8),
}


def cmd_paper_case(args) -> int:
    spec = _SCENARIOS.get(args.name)
    if spec is None:
        print(f"unknown scenario {args.name!r}; choose from {sorted(_SCENARIOS)}",
              file=sys.stderr)
        return EXIT_CONFIG
    top, m = TopRow(spec["top"]), UnityOrder(spec["m"])
    builder = build_flat_sl3 if spec["builder"] == "flat" else build_atypical_sl3
    g = builder(top, m)
    rep = full_report(g, tol=spec["rel_tol"])
    print(f"{args.name}: top {top.values}, m={m.m}, dimension {g.dimension}")
    print(f"  max relation residual {rep.max_residual:.2e} "
          f"(tolerance {spec['rel_tol']:.0e})")
    print(f"  invariant closures: {rep.invariant_dims}")
    ok = rep.passed
    if "dims" in spec:
        ok = ok and set(rep.invariant_dims) == spec["dims"]
    if "contains" in spec:
        ok = ok and spec["contains"] in rep.invariant_dims
    print("PASSED" if ok else "FAILED")
    return EXIT_OK if ok else EXIT_VERIFY


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gzroots",
        description="Gelfand-Zetlin representations of U_q(sl(N)), "
                    "including atypical modules at odd roots of unity",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p, top_required=True):
        p.add_argument("--top", required=top_required,
                       help="top row, comma list highest first; trailing 0 implied")
        p.add_argument("--m", type=int, default=None,
                       help="root-of-unity order (odd, >= 3)")
        p.add_argument("--generic-angle", type=float, default=0.37,
                       help="angle of a generic q on the unit circle")
        p.add_argument("--convention", default="generic",
                       choices=["generic", "flat", "atypical"])
        p.add_argument("--tol", type=float, default=None,
                       help="tolerance (default 1e-9 or GZROOTS_TOL)")

    p = sub.add_parser("dim", help="dimension of the module for a top row")
    p.add_argument("--top", required=True)
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("enumerate", help="list all patterns of a module")
    p.add_argument("--top", required=True)
    p.add_argument("--weights", action="store_true",
                   help="also print Cartan-exponent multiplicities")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("build", help="build a representation and write it out")
    add_common(p)
    p.add_argument("--out", default=None)
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="build (or load) and check all relations")
    add_common(p, top_required=False)
    p.add_argument("--in", dest="infile", default=None,
                   help="verify a previously written build file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", help="re-serialize a build file (json or csv)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("paper-case", help="run a named reference scenario")
    p.add_argument("name", choices=sorted(_SCENARIOS))
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_paper_case)

    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "verify" and not args.infile and not args.top:
            print("verify needs --top or --in", file=sys.stderr)
            return EXIT_CONFIG
        return args.func(args)
    except (EvenOrderUnsupported, NotFlat, EmptyModule, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (UnresolvedDivergence, DivergentElement) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT


if __name__ == "__main__":
    sys.exit(main())
