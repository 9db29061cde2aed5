"""Command line: models, verify, duality, stone, export.

Exit codes: 0 pass, 1 verification failure, 2 usage or IO error, 3 resource guard.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import catalog
from .errors import GuardError, VerificationError
from .export import dumps, groupoid_to_json, sheaf_to_dot, space_to_json, write
from .logic.parser import ParseError, parse_in_context
from .logic.syntax import SortCheckError
from .models import DEFAULT_CEILING
from .report import Report
from .verify import SUITES, RunConfig, duality_suite, groupoid_for, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3
MAX_BOUND = 4


class UsageError(Exception):
    pass


def _config(args) -> RunConfig:
    if args.bound < 1:
        raise UsageError("--bound must be at least 1")
    if args.bound > MAX_BOUND and not args.force:
        raise GuardError(f"--bound {args.bound} exceeds the default limit {MAX_BOUND}; pass --force to run anyway")
    try:
        theory = catalog.resolve(args.theory)
    except FileNotFoundError as exc:
        raise UsageError(f"cannot read theory: {exc.filename or args.theory}") from exc
    if args.track:
        tracked = [parse_in_context(t, theory.signature) for t in args.track]
    elif args.theory.endswith("+m") and args.theory[:-2] == "classical_p":
        tracked = catalog.morleyized_sample()[1]
    else:
        tracked = catalog.tracked(theory, Path(args.theory).stem if args.theory not in catalog.NAMES else None)
    return RunConfig(theory, args.bound, tracked, args.fiber_cap, args.universe_mode, args.ceiling, args.strict)


def _emit(rep: Report, args, out=None) -> int:
    out = out or sys.stdout
    if args.json:
        out.write(dumps(rep.to_json()))
    else:
        for line in rep.lines():
            print(line, file=out)
    if args.out:
        write(Path(args.out) / "report.json", dumps(rep.to_json()))
    if not rep.ok:
        return EXIT_FAIL
    if rep.skipped and args.strict:
        return EXIT_FAIL
    return EXIT_OK


def cmd_models(args) -> int:
    cfg = _config(args)
    g = groupoid_for(cfg)
    isos = len(g.arrows)
    if args.json:
        sys.stdout.write(dumps(groupoid_to_json(g)))
    else:
        print(f"{g.n_objects} models, {isos} isomorphisms")
        for i, m in enumerate(g.models):
            print(f"  {i}: {m.describe()}")
    if args.out:
        write(Path(args.out) / "groupoid.json", dumps(groupoid_to_json(g)))
        write(Path(args.out) / "groupoid.dot", g.to_dot())
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config(args)
    return _emit(run_suite(cfg, args.suite), args)


def cmd_duality(args) -> int:
    cfg = _config(args)
    g = groupoid_for(cfg)
    rep = duality_suite(cfg, g, corrupt=args.corrupt_unit)
    if args.dump_tables and not rep.skipped:
        from .duality import counit_eval, generator_objects, unit
        from .sheaves import definable_sheaf
        ce = counit_eval(g, tracked=cfg.tracked)
        data = unit(g.gpd, [definable_sheaf(g, f) for f in generator_objects(g.theory)])
        tables = {
            "counit": {"objects": [str(f) for f in ce.tracked],
                       "homs": {f"{i}->{j}": [{"sigma": str(a.sigma), "map": list(a.table)} for a in arrows]
                                for (i, j), arrows in sorted(ce.homs.items())}},
            "unit": {"eta0": list(data.eta0), "eta1": list(data.eta1),
                     "objects": data.target.n_objects, "arrows": data.target.n_arrows},
        }
        text = dumps(tables)
        if args.out:
            write(Path(args.out) / "tables.json", text)
        else:
            sys.stdout.write(text)
    return _emit(rep, args)


def cmd_stone(args) -> int:
    from .stone import all_boolean_algebras, ba_round_trip, ba_sub1_round_trip, spectrum
    algs = all_boolean_algebras(args.size)
    if args.emit:
        sys.stdout.write(dumps([b.to_json() for b in algs]))
        return EXIT_OK
    rep = Report(f"stone {args.size}")
    bad = []
    for b in algs:
        r = ba_round_trip(b)
        r.extend(ba_sub1_round_trip(b))
        if not r.ok:
            bad.append({"algebra": b.name, "failures": [e.line() for e in r.violations()]})
    ok = not bad
    if args.json:
        rep.add("round trip", ok, bad, note=f"{len(algs)} algebras")
        sys.stdout.write(dumps({**rep.to_json(),
                                "algebras": [{"name": b.name, "size": b.size, "atoms": len(b.atoms()),
                                              "spectrum": space_to_json(spectrum(b).top)} for b in algs]}))
    else:
        print(f"all {len(algs)} BAs up to {args.size} elements: round trip {'OK' if ok else 'FAILED'}")
        for w in bad:
            print(f"  {w['algebra']}: {'; '.join(w['failures'])}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_export(args) -> int:
    cfg = _config(args)
    g = groupoid_for(cfg)
    out = Path(args.out) if args.out else None
    files = {}
    if args.what in ("groupoid", "all"):
        files["groupoid.json"] = dumps(groupoid_to_json(g))
        files["groupoid.dot"] = g.to_dot()
    if args.what in ("sheaves", "all"):
        from .sheaves import definable_sheaf
        for k, f in enumerate(cfg.tracked):
            sh = definable_sheaf(g, f)
            files[f"sheaf{k}.json"] = dumps(sh.to_json())
            files[f"sheaf{k}.dot"] = sheaf_to_dot(sh)
    for name, text in files.items():
        if out is None:
            if name.endswith(".json") or args.what != "all":
                sys.stdout.write(f"# {name}\n{text}")
        else:
            write(out / name, text)
    if out is not None:
        print(f"wrote {len(files)} files to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stonegpd", description="Finite groupoids of models, sheaves and duality checks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--theory", default="t_eq", help="bundled theory name (suffix +m to Morleyize) or a .thy path")
        sp.add_argument("--bound", "-n", type=int, default=2, help="atom universe size (default 2)")
        sp.add_argument("--track", action="append", default=[], metavar="FORMULA",
                        help="tracked formula in context, e.g. '[x:V | true]' (repeatable)")
        sp.add_argument("--fiber-cap", type=int, default=2, help="fiber size cap for formal sheaves")
        sp.add_argument("--universe-mode", choices=("atoms", "tuples"), default="tuples")
        sp.add_argument("--ceiling", type=int, default=DEFAULT_CEILING, help="enumeration node ceiling")
        sp.add_argument("--force", action="store_true", help=f"allow bounds above {MAX_BOUND}")
        sp.add_argument("--strict", action="store_true", help="treat SKIPPED as failure")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--out", help="output directory")

    sp = sub.add_parser("models", help="enumerate models and isomorphisms")
    common(sp)
    sp.set_defaults(func=cmd_models)
    sp = sub.add_parser("verify", help="run lemma suites")
    common(sp)
    sp.add_argument("--suite", choices=SUITES, default="all")
    sp.set_defaults(func=cmd_verify)
    sp = sub.add_parser("duality", help="counit, unit and triangle identities")
    common(sp)
    sp.add_argument("--dump-tables", action="store_true", help="print the counit and unit tables")
    sp.add_argument("--corrupt-unit", action="store_true", help="move one unit arrow (demonstrates a failure)")
    sp.set_defaults(func=cmd_duality)
    sp = sub.add_parser("stone", help="Boolean algebra round trips")
    sp.add_argument("size", type=int, nargs="?", default=16, help="largest algebra size")
    sp.add_argument("--emit", action="store_true", help="print every algebra as JSON")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_stone)
    sp = sub.add_parser("export", help="write JSON and DOT artifacts")
    common(sp)
    sp.add_argument("--what", choices=("groupoid", "sheaves", "all"), default="all")
    sp.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except GuardError as exc:
        print(f"error: resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except VerificationError as exc:
        print(f"error: verification: {exc} witness={exc.witness}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, ParseError, SortCheckError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
