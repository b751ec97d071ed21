"""Command-line entry point: ``forcematch <subcommand> ...``.

Exit codes: 0 ok, 1 verification failed, 2 malformed input,
3 precondition not met, 4 oracle limit exceeded.
"""
from __future__ import annotations

import argparse
import csv
import sys
import time

from . import divorces, engine, generators, manipulation, oracle
from .errors import DomainError, MalformedInputError, MalformedStateError, OracleLimitError
from .model import format_instance, format_matching, parse_instance, parse_matching

EXIT_OK, EXIT_FAILED, EXIT_MALFORMED, EXIT_PRECONDITION, EXIT_LIMIT = 0, 1, 2, 3, 4


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc.strerror}") from None


def _load(args):
    inst = parse_instance(_read(args.instance))
    if getattr(args, "matching", None) is None:
        return inst, None
    return inst, parse_matching(_read(args.matching), inst.n_women, inst.n_men)


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_solve(args, out):
    inst, _ = _load(args)
    if args.sequential:
        matching = engine.run_sequential(inst, args.proposing)
        rt = None
    else:
        matching, rt = engine.run(inst, args.proposing, trace=args.trace)
    out.write(format_matching(matching))
    if args.trace and rt is not None:
        tags = ("m", "w") if args.proposing == "men" else ("w", "m")
        out.write("".join("# " + line + "\n" for line in rt.format(*tags).splitlines()))
    return EXIT_OK


def pick_mode(inst, mu) -> str:
    if inst.n_women != inst.n_men or not mu.is_perfect():
        return "partial"
    if manipulation.tops_distinct(inst):
        return "flat"
    return "general"


def cmd_manipulate(args, out):
    inst, mu = _load(args)
    if args.naive:
        res = manipulation.naive_truncation(inst, mu)
    else:
        mode = pick_mode(inst, mu) if args.mode == "auto" else args.mode
        if mode == "flat":
            res = manipulation.manipulate_flat(inst, mu)
        elif mode == "general":
            res = manipulation.manipulate_general(inst, mu, check=args.check)
        else:
            res = manipulation.manipulate_partial(inst, mu, check=args.check)
    out.write(format_instance(inst.with_women(res.prefs_w)))
    out.write(res.footer() + "\n")
    return EXIT_OK


def cmd_verify(args, out):
    inst, mu = _load(args)
    bad = engine.rationality_violations(inst, mu)
    blocking = engine.find_blocking_pairs(inst, mu)
    stable = not bad and not blocking
    out.write(f"stable: {'yes' if stable else 'no'}\n")
    for w, m in bad:
        out.write(f"irrational: {w} {m}\n")
    for w, m in blocking:
        out.write(f"blocking: {w} {m}\n")
    ok = stable
    if args.unique:
        unique = oracle.is_unique_stable(inst, mu, args.oracle_limit, args.jobs)
        out.write(f"unique: {'yes' if unique else 'no'}\n")
        if not unique:
            found = sorted(oracle.enumerate_stable(inst, args.oracle_limit, args.jobs), key=_order)
            _write_matchings(out, found)
        ok = ok and unique
    return EXIT_OK if ok else EXIT_FAILED


def _order(matching):
    return tuple(-1 if m is None else m for m in matching.w2m)


def _write_matchings(out, found):
    out.write(f"# stable matchings: {len(found)}\n")
    for k, m in enumerate(found, start=1):
        out.write(f"# matching {k}\n")
        out.write(format_matching(m))


def cmd_enumerate(args, out):
    inst, _ = _load(args)
    found = sorted(oracle.enumerate_stable(inst, args.oracle_limit, args.jobs), key=_order)
    _write_matchings(out, found)
    return EXIT_OK


def cmd_gen_tight(args, out):
    if args.balanced is not None:
        inst, mu, _ = generators.gen_tight_balanced(args.balanced, args.sizes or ())
    elif args.divorce is not None:
        inst, mu = generators.gen_divorce_tight(args.divorce)
    else:
        nw, nm = args.partial
        k = min(nw, nm)
        inst, mu, _, _ = generators.gen_tight_partial(nw, nm, range(k), range(k), args.sizes or ())
    if args.out:
        _write(args.out + ".inst", format_instance(inst))
        _write(args.out + ".match", format_matching(mu))
    else:
        out.write(format_instance(inst))
        out.write("".join(f"# match {w} {m}\n" for w, m in mu.pairs()))
    return EXIT_OK


def cmd_simulate_divorces(args, out):
    inst, _ = _load(args)
    strategies = {}
    if args.strategies:
        strategies = divorces.parse_strategies(_read(args.strategies), inst.n_women, inst.n_men)
    final, log = divorces.simulate_with_divorces(inst, strategies, trace=args.trace)
    out.write(format_matching(final))
    out.write(f"# divorces={log.n_divorces}\n")
    if args.trace:
        out.write("".join("# " + line + "\n" for line in log.format().splitlines()))
    return EXIT_OK


def cmd_divorce_manipulate(args, out):
    inst, mu = _load(args)
    prefs_w, strategies = divorces.one_divorce_strategy(inst, mu)
    result = inst.with_women(prefs_w)
    _, log = divorces.simulate_with_divorces(result, strategies)
    if args.out:
        _write(args.out + ".inst", format_instance(result))
        _write(args.out + ".strat", divorces.format_strategies(strategies))
    else:
        out.write(format_instance(result))
        out.write("".join("# " + line + "\n"
                          for line in divorces.format_strategies(strategies).splitlines()))
    out.write(f"# divorces={log.n_divorces}\n")
    return EXIT_OK


def cmd_bench(args, out):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["n", "seed", "cheap_iters", "expensive_iters", "nanos"])
    for n in args.n:
        for k in range(args.repeat):
            seed = args.seed + k
            inst, mu = generators.gen_random(n, n, seed=seed, flat=args.flat)
            t0 = time.perf_counter_ns()
            res = manipulation.manipulate_general(inst, mu)
            nanos = time.perf_counter_ns() - t0
            writer.writerow([n, seed, res.iterations["cheap"], res.iterations["expensive"], nanos])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="forcematch", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def oracle_opts(sp):
        sp.add_argument("--oracle-limit", type=int, default=oracle.DEFAULT_MATCHING_LIMIT,
                        help="largest number of search nodes the brute-force oracle may visit")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for the oracle")

    sp = sub.add_parser("solve", help="run deferred acceptance")
    sp.add_argument("instance")
    sp.add_argument("--proposing", choices=["men", "women"], default="men")
    sp.add_argument("--sequential", action="store_true", help="one proposal at a time, lowest id first")
    sp.add_argument("--trace", action="store_true", help="append the night log as comments")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("manipulate", help="synthesize women's lists forcing a matching")
    sp.add_argument("instance")
    sp.add_argument("matching")
    sp.add_argument("--mode", choices=["auto", "flat", "general", "partial"], default="auto")
    sp.add_argument("--naive", action="store_true", help="each woman lists only her target")
    sp.add_argument("--check", action="store_true", help="assert construction invariants at every step")
    sp.set_defaults(func=cmd_manipulate)

    sp = sub.add_parser("verify", help="check stability (and uniqueness) of a matching")
    sp.add_argument("instance")
    sp.add_argument("matching")
    sp.add_argument("--unique", action="store_true")
    oracle_opts(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("gen-tight", help="write a witness instance and its target matching")
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--balanced", type=int, metavar="N")
    grp.add_argument("--divorce", type=int, metavar="N")
    grp.add_argument("--partial", type=int, nargs=2, metavar=("N_WOMEN", "N_MEN"))
    sp.add_argument("--sizes", type=int, nargs="*", default=[])
    sp.add_argument("--out", metavar="PREFIX", help="write PREFIX.inst and PREFIX.match")
    sp.set_defaults(func=cmd_gen_tight)

    sp = sub.add_parser("enumerate", help="list every stable matching by brute force")
    sp.add_argument("instance")
    oracle_opts(sp)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("simulate-divorces", help="run seasons with divorce strategies")
    sp.add_argument("instance")
    sp.add_argument("--strategies", metavar="FILE")
    sp.add_argument("--trace", action="store_true")
    sp.set_defaults(func=cmd_simulate_divorces)

    sp = sub.add_parser("divorce-manipulate", help="lists without blacklists plus one divorce per woman")
    sp.add_argument("instance")
    sp.add_argument("matching")
    sp.add_argument("--out", metavar="PREFIX", help="write PREFIX.inst and PREFIX.strat")
    sp.set_defaults(func=cmd_divorce_manipulate)

    sp = sub.add_parser("bench", help="time the general construction on random markets (CSV)")
    sp.add_argument("--n", type=int, nargs="+", default=[64])
    sp.add_argument("--repeat", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0, help="first seed")
    sp.add_argument("--flat", action="store_true")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (MalformedInputError, MalformedStateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except DomainError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OracleLimitError as exc:
        print(f"oracle refused: {exc}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
