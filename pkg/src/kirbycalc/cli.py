"""Command line: check, run, invariants, recombine, replay, fuzz."""
from __future__ import annotations

import argparse
import os
import sys

from .diagram import DiagramError, validate
from .dsl import DslError, format_link, parse, parse_band
from .fuzz import FuzzParams, check_instance, random_instance
from .invariants import invariant_record, linking_matrix
from .moves import MoveError
from .runner import FIGURES, replay, run
from .translate import recombine


def _read(path: str):
    with open(path) as fh:
        return parse(fh.read())


def _link(doc, name: str):
    if name not in doc.links:
        raise DslError("UNRESOLVED", f"no link named {name}")
    return doc.links[name]


def cmd_check(args) -> int:
    doc = _read(args.file)
    ok = True
    for name in sorted(doc.links):
        rep = validate(doc.links[name], strict=args.strict, planar=args.strict)
        codes = ",".join(rep.codes()) or "-"
        print(f"LINK {name} VALID {'yes' if rep.ok else 'no'} CODES {codes}")
        ok &= rep.ok
    print(f"SCRIPTS {len(doc.scripts)}")
    return 0 if ok else 1


def _strict_gate(doc, strict: bool) -> bool:
    if not strict:
        return True
    ok = True
    for name in sorted(doc.links):
        rep = validate(doc.links[name], strict=True)
        if not rep.ok:
            print(f"LINK {name} VALID no CODES {','.join(rep.codes())}")
            ok = False
    return ok


def _emit_trace(trace, plot_dir, stem: str) -> int:
    sys.stdout.write(trace.text())
    if plot_dir:
        from .plotting import plot_trace

        path = plot_trace(trace, os.path.join(plot_dir, f"{stem}_trace.png"))
        print(f"PLOT {path}")
    return 0 if trace.overall == "pass" else 1


def cmd_run(args) -> int:
    doc = _read(args.file)
    if not _strict_gate(doc, args.strict):
        return 1
    stem = os.path.splitext(os.path.basename(args.file))[0]
    return _emit_trace(run(doc), args.plot, stem)


def cmd_invariants(args) -> int:
    doc = _read(args.file)
    d = _link(doc, args.link)
    if not _strict_gate(type(doc)({args.link: d}, {}), args.strict):
        return 1
    rec = invariant_record(d)
    sys.stdout.write(rec.as_text())
    framed = d if d.is_framed() else recombine(d)
    lm = linking_matrix(framed)
    for label, row in zip(lm.labels, lm.rows()):
        print(f"ROW {label} " + " ".join(str(v) for v in row))
    if args.plot:
        from .plotting import plot_linking_matrix

        path = plot_linking_matrix(lm, os.path.join(args.plot, f"{args.link}_linking.png"), args.link)
        print(f"PLOT {path}")
    return 0


def cmd_recombine(args) -> int:
    doc = _read(args.file)
    d = _link(doc, args.link)
    bands = {}
    for spec in args.bands or []:
        pair, _, text = spec.partition("=")
        bands[pair.strip()] = parse_band(text)
    out = recombine(d, bands)
    print(format_link(f"{args.link}_recombined", out))
    return 0


def cmd_replay(args) -> int:
    trace = replay(args.figure)
    return _emit_trace(trace, args.plot, args.figure.lower())


def cmd_fuzz(args) -> int:
    p = FuzzParams(args.max_components, args.max_crossings, args.max_pairs)
    results = []
    for seed in range(args.seed, args.seed + args.count):
        d, moves = random_instance(seed, p)
        rep = validate(d, strict=True)
        checks = check_instance(d, moves)
        fails = sum(1 for _, ok in checks if not ok)
        verdict = "pass" if rep.ok and moves and not fails else "fail"
        print(f"FUZZ {seed} COMPONENTS {len(d.components)} CROSSINGS {d.n_crossings()} "
              f"PAIRS {len(d.pairs)} MOVES {len(moves)} FAILS {fails} VERDICT {verdict}")
        results.append({"seed": seed, "checks": checks, "verdict": verdict})
    overall = all(r["verdict"] == "pass" for r in results)
    print(f"RESULT {'pass' if overall else 'fail'}")
    if args.plot:
        from .plotting import plot_fuzz

        path = plot_fuzz(results, os.path.join(args.plot, f"fuzz_{args.seed}_{args.count}.png"))
        print(f"PLOT {path}")
    return 0 if overall else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kirbycalc", description=__doc__)
    ap.add_argument("--strict", action="store_true", help="require even crossing parity and planarity")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", help="parse and validate a document")
    s.add_argument("file")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("run", help="execute the scripts of a document")
    s.add_argument("file")
    s.add_argument("--plot", metavar="DIR")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("invariants", help="invariant record of one link")
    s.add_argument("file")
    s.add_argument("--link", required=True)
    s.add_argument("--plot", metavar="DIR")
    s.set_defaults(func=cmd_invariants)

    s = sub.add_parser("recombine", help="trade every ball pair of a link for an annulus")
    s.add_argument("file")
    s.add_argument("--link", required=True)
    s.add_argument("--bands", nargs="*", metavar="PAIR=BAND",
                   help="e.g. 'P=band + { over x[0], over x[0] }'")
    s.set_defaults(func=cmd_recombine)

    s = sub.add_parser("replay", help="replay a bundled proof figure")
    s.add_argument("figure", type=str.upper, choices=FIGURES)
    s.add_argument("--plot", metavar="DIR")
    s.set_defaults(func=cmd_replay)

    s = sub.add_parser("fuzz", help="random instances with invariance checks")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--max-components", type=int, default=4)
    s.add_argument("--max-crossings", type=int, default=12)
    s.add_argument("--max-pairs", type=int, default=2)
    s.add_argument("--plot", metavar="DIR")
    s.set_defaults(func=cmd_fuzz)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DslError, DiagramError, MoveError, OSError) as exc:
        print(f"ERROR {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
