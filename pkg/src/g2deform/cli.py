"""Command-line entry point.

Subcommands
-----------
verify-algebra   exact identities of the flat structure
dirac            kernel/index reports for the closed torus or the strip
boundary         boundary-operator laws on the gallery surfaces
index            Chern numbers and the deformation index
example NAME     run one catalog example and write its report
verify-all       the full acceptance suite; exit code 1 on any failure

Exit codes: 0 pass, 1 criterion failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from .gallery import (CRITERIA, EXAMPLES, RunConfig, run_example, verify_all,
                      write_report)

EXAMPLE_HELP = {
    "torus3-closed": "closed flat 3-torus: kernel dimension 4, vanishing index",
    "strip-coassoc": "strip with flat 4-torus boundary constraints: kernels 2/2, index 0",
    "ball-constant-e": "round ball boundary with a constant transverse direction: index 1",
    "sphere-rho": "sphere of radius rho: transverse spectrum at the inverse radius",
    "ellipsoid": "ellipsoid boundary: spectrum matches the principal curvatures",
    "cy-torus-s1": "product 3-torus Hodge operator: kernel dimension 4",
    "cy-torus-perturbed": "perturbed Hodge operator: kernel drops to 3",
    "joyce-involutions": "exact pullback identities of the five torus involutions",
}


def _build_parser():
    p = argparse.ArgumentParser(prog="g2deform", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(q):
        q.add_argument("--n", "--resolution", dest="resolution", type=int, default=None)
        q.add_argument("--tol", type=float, default=1e-8)
        q.add_argument("--rho", type=float, default=0.5)
        q.add_argument("--lambda", dest="lam", type=float, default=0.05)
        q.add_argument("--a", type=float, default=1.0)
        q.add_argument("--out", default=None, help="report output directory")
        q.add_argument("--format", default="json", help="comma list: json,csv")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--bit-reproducible", action="store_true")
        q.add_argument("--refine", type=int, default=0)
        q.add_argument("--subdivisions", type=int, default=3)
        q.add_argument("--parallel", action="store_true")
        q.add_argument("--config", default=None, help="JSON file mirroring these flags")

    for name in ("verify-algebra", "dirac", "boundary", "index", "verify-all"):
        q = sub.add_parser(name)
        common(q)
    q = sub.add_parser("example", epilog="catalog:\n" + "\n".join(
        f"  {k:18s} {v}" for k, v in EXAMPLE_HELP.items()),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    q.add_argument("name", choices=sorted(EXAMPLES), metavar="NAME",
                   help="catalog example name (see list below)")
    common(q)
    return p


def _config_from(args):
    values = vars(args).copy()
    if values.get("config"):
        with open(values["config"]) as fh:
            file_values = json.load(fh)
        for k, v in file_values.items():
            values[k.replace("-", "_")] = v
    return RunConfig(
        out_dir=values.get("out"),
        formats=tuple(str(values.get("format", "json")).split(",")),
        seed=int(values.get("seed", 0)),
        bit_reproducible=bool(values.get("bit_reproducible", False)),
        refine=int(values.get("refine", 0)),
        resolution=values.get("resolution"),
        tolerance=float(values.get("tol", 1e-8)),
        rho=float(values.get("rho", 0.5)),
        lam=float(values.get("lam", 0.05)),
        a=float(values.get("a", 1.0)),
        subdivisions=int(values.get("subdivisions", 3)),
        parallel=bool(values.get("parallel", False)),
    )


def _print_checks(report):
    for c in report["checks"]:
        mark = "PASS" if c["pass"] else "FAIL"
        print(f"  [{mark}] {c['name']}: {c['law']}")
    return all(c["pass"] for c in report["checks"])


def _run_named_examples(names, config):
    ok = True
    if config.parallel and len(names) > 1:
        with ThreadPoolExecutor() as pool:
            reports = list(pool.map(lambda n: run_example(n, config), names))
    else:
        reports = [run_example(n, config) for n in names]
    for rep in reports:
        print(f"{rep['example']} (wall {rep['wall_time_ms']:.0f} ms)")
        ok &= _print_checks(rep)
    return ok


def main(argv=None):
    try:
        args = _build_parser().parse_args(argv)
        config = _config_from(args)
    except SystemExit as exc:
        # argparse exits with 2 on bad flags already
        raise
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "verify-algebra":
            from .gallery import criterion_exact_algebra
            checks = criterion_exact_algebra(config)
            for c in checks:
                mark = "PASS" if c.passed else "FAIL"
                print(f"  [{mark}] {c.name}: {c.law}")
            ok = all(c.passed for c in checks)
        elif args.command == "dirac":
            ok = _run_named_examples(["torus3-closed", "strip-coassoc",
                                      "cy-torus-s1", "cy-torus-perturbed"], config)
        elif args.command == "boundary":
            ok = _run_named_examples(["ball-constant-e", "ellipsoid"], config)
        elif args.command == "index":
            from .gallery import criterion_index_formula
            checks = criterion_index_formula(config)
            for c in checks:
                mark = "PASS" if c.passed else "FAIL"
                print(f"  [{mark}] {c.name}: {c.law}")
            ok = all(c.passed for c in checks)
        elif args.command == "example":
            ok = _run_named_examples([args.name], config)
        elif args.command == "verify-all":
            rows, ok = verify_all(config)
            width = max(len(r["name"]) for r in rows)
            for r in rows:
                mark = "PASS" if r["pass"] else "FAIL"
                print(f"criterion {r['criterion']:>2}  {r['name']:<{width}}  "
                      f"[{mark}]  {r['wall_time_ms']:8.0f} ms")
            if config.out_dir:
                write_report(_summary_report(rows, config), config)
        else:  # pragma: no cover
            return 2
    except KeyError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


def _summary_report(rows, config):
    from .gallery import _report_skeleton

    report = _report_skeleton("verify-all", config)
    for r in rows:
        report["checks"].extend(r["checks"])
    report["wall_time_ms"] = 0.0 if config.bit_reproducible else float(
        sum(r["wall_time_ms"] for r in rows))
    return report


if __name__ == "__main__":
    sys.exit(main())
