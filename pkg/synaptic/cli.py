"""
Command line interface.

    synaptic decompose --input pair.json
    synaptic commutator --input pair.json --output json
    synaptic infimum --input pair.json [--q q.json]
    synaptic spectral --input pair.json
    synaptic verify --seed 42 --trials 100 --dims 2..5 [--check cbs]
    synaptic verify --input failure.json
    synaptic example [--golden r3_example.json]

Exit codes: 0 on success, 1 when a check or an invariant fails, 2 on invalid
input or usage.
"""
import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from synaptic import golden, serialize
from synaptic.calculus import spectral_resolution
from synaptic.cbs import cbs_decompose
from synaptic.commutator import inequality_chain
from synaptic.errors import PreconditionError, SynapticError
from synaptic.infimum import atom_mean, inf_with_projection
from synaptic.linalg import DEFAULT_TOLERANCE
from synaptic.utils import parse_range
from synaptic.verify import CHECKS, replay, run_battery, statements_of

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def format_matrix(m, indent="    "):
    rows = np.atleast_2d(np.asarray(m, dtype=float))
    if not rows.size:
        return indent + "[]"
    return "\n".join(indent + " ".join(f"{x:11.6f}" for x in row)
                     for row in rows)


def _section(name, m):
    return f"{name} =\n{format_matrix(m)}"


def _emit(args, data, text):
    if args.output == "json":
        print(serialize.dumps(data))
    else:
        print(text)


def _describe_projection(r):
    if r.is_unit:
        return "1"
    if r.is_zero:
        return "0"
    return f"projection of rank {r.rank}"


def cmd_decompose(args, tol):
    pair = serialize.load_pair(args.input, tol, _overrides(args))
    d = cbs_decompose(pair.p, pair.e, pair.tol)
    carriers = {"c": d.c_carrier, "s": d.s_carrier,
                "j": d.j_carrier, "b": d.b_carrier}
    residuals = d.residuals()
    data = {
        "dim": d.dim, "p": d.p, "e": d.e,
        "c": d.c, "s": d.s, "j": d.j, "b": d.b, "k": d.k.element,
        "z": d.z, "t": d.t,
        "carriers": carriers,
        "ranks": {name: x.rank for name, x in carriers.items()},
        "residuals": residuals,
    }
    lines = [_section(name, getattr(d, name).entries)
             for name in ("c", "s", "j", "b")]
    lines += [_section("k", d.k.element.entries),
              _section("z", d.z.entries), _section("t", d.t.entries),
              "carrier ranks: " + ", ".join(
                  f"{name}° = {x.rank}" for name, x in carriers.items()),
              f"reconstruction residual {residuals['reconstruction']:.3e}"]
    _emit(args, data, "\n".join(lines))
    return EXIT_OK


def cmd_commutator(args, tol):
    pair = serialize.load_pair(args.input, tol, _overrides(args))
    report = inequality_chain(pair.p, pair.e, pair.tol)
    data = {
        "r": report.r, "rank": report.r.rank,
        "b_carrier": report.b_carrier,
        "b_carrier_rank": report.b_carrier.rank,
        "chain_ok": report.chain_ok,
        "totally_noncompatible": report.totally_noncompatible,
        "generic_position": report.generic_position,
    }
    text = "\n".join([
        f"[p,e] = {_describe_projection(report.r)}",
        _section("[p,e]", report.r.entries),
        f"rank(b°) = {report.b_carrier.rank}",
        f"chain b ≤ b° ≤ [p,e] ≤ c°∧s°: {'ok' if report.chain_ok else 'FAILED'}",
        f"totally noncompatible: {report.totally_noncompatible}",
        f"generic position: {report.generic_position}"])
    _emit(args, data, text)
    return EXIT_OK


def cmd_infimum(args, tol):
    pair = serialize.load_pair(args.input, tol, _overrides(args))
    if args.q:
        q = serialize.load_projection(args.q, pair.dim, pair.tol)
    else:
        q = pair.p.perp
    infimum = inf_with_projection(pair.e, q, pair.tol)
    data = {"q": q, "infimum": infimum, "trace": infimum.trace}
    lines = [_section("e ∧ q", infimum.entries),
             f"trace {infimum.trace:.12g}"]
    if not args.q and pair.p.rank == 1:
        data["alpha"] = atom_mean(pair.p, pair.e, pair.tol)
        lines.append(f"α = {data['alpha']:.12g}")
    _emit(args, data, "\n".join(lines))
    return EXIT_OK


def cmd_spectral(args, tol):
    pair = serialize.load_pair(args.input, tol, _overrides(args))
    resolution = spectral_resolution(pair.e, pair.tol)
    data = {"thresholds": list(resolution.thresholds),
            "cuts": list(resolution.cuts),
            "ranks": resolution.ranks}
    lines = []
    for threshold, cut in zip(resolution.thresholds, resolution.cuts):
        lines.append(_section(f"cut at {threshold:.12g} (rank {cut.rank})",
                              cut.entries))
    _emit(args, data, "\n".join(lines))
    return EXIT_OK


def _replay_records(data):
    records = data.get("failures") if isinstance(data, dict) else None
    return records if records is not None else [data]


def _replay(args, tol):
    results, failed = [], False
    for record in _replay_records(serialize.load(args.input)):
        pair = serialize.parse_pair(record, tol, _overrides(args))
        if pair.replay is None:
            raise PreconditionError(
                "input needs check, seed and trial fields to be replayed")
        outcome = replay(pair)
        failed |= not outcome.passed
        results.append({"check": pair.replay[0], "passed": outcome.passed,
                        "residual": outcome.residual,
                        "message": outcome.message})
    text = "\n".join(
        f"{r['check']}: {'passed' if r['passed'] else 'FAILED'} "
        f"(residual {r['residual']:.3e}){' ' + r['message'] if r['message'] else ''}"
        for r in results)
    _emit(args, {"replayed": results}, text)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_verify(args, tol):
    if args.list_checks:
        for name in CHECKS:
            labels = statements_of(name)
            print(f"{name}  {', '.join(labels)}" if labels else name)
        return EXIT_OK
    if args.input:
        return _replay(args, tol)
    try:
        dims = parse_range(args.dims)
    except ValueError as ex:
        raise PreconditionError(str(ex)) from None
    report = run_battery(args.seed, args.trials, dims, args.check, tol,
                         args.jobs)
    if args.report:
        serialize.dump(report.to_dict(), args.report)
    if args.output == "json":
        print(serialize.dumps(report.to_dict()))
    else:
        print(report.to_text())
        for failure in report.failures:
            print(f"FAILED {failure['check']} on trial {failure['trial']} "
                  f"(seed {failure['seed']}, {failure['kind']})")
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_example(args, tol):
    p, e = golden.r3_pair()
    summary = golden.example_summary(p, e, tol)
    failures = golden.example_assertions(summary)
    mismatches = golden.compare_with_golden(
        summary, golden.load_golden(args.golden))
    data = dict(summary, failures=failures, golden_mismatches=mismatches)
    lines = [
        f"[p,e] = {_describe_projection(summary['commutator'])}",
        f"rank(b°) = {summary['b_carrier_rank']}",
        f"α = {summary['alpha']:.12g}",
        f"β = {summary['beta']:.12g}",
        "cuts at " + ", ".join(f"{x:.12g}" for x in summary["thresholds"]),
        _section("e ∧ p⊥", summary["infimum"].entries),
        f"totally noncompatible: {summary['totally_noncompatible']}",
        f"generic position: {summary['generic_position']}"]
    lines += [f"FAILED {message}" for message in failures]
    lines += [f"golden mismatch {message}" for message in mismatches]
    if not (failures or mismatches):
        lines.append("golden values match")
    _emit(args, data, "\n".join(lines))
    return EXIT_FAILED if failures or mismatches else EXIT_OK


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return value


def create_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("text", "json"), default="text",
                        help="output format")
    common.add_argument("--tol-rank", type=_positive_float,
                        help="override rank_eps (also over the input file's tol)")
    common.add_argument("--tol-comm", type=_positive_float,
                        help="override comm_eps (also over the input file's tol)")
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="log more (repeat for debug output)")

    parser = argparse.ArgumentParser(
        prog="synaptic", description="Computations in synaptic algebras of "
                                     "symmetric matrices")
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    for name, func, text in (
            ("decompose", cmd_decompose, "CBS decomposition of a pair"),
            ("commutator", cmd_commutator, "commutator [p,e] of a pair"),
            ("infimum", cmd_infimum, "infimum of e with a projection"),
            ("spectral", cmd_spectral, "spectral resolution of e")):
        sub = commands.add_parser(name, parents=[common], help=text)
        sub.add_argument("--input", required=True, help="pair JSON file")
        if name == "infimum":
            sub.add_argument("--q", help="projection JSON file (default p⊥)")
        sub.set_defaults(func=func)

    sub = commands.add_parser("verify", parents=[common],
                              help="run the randomized verification battery")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--trials", type=int, default=100)
    sub.add_argument("--dims", default="2..5", help="dimensions, as A..B")
    sub.add_argument("--check", help="comma-separated check names, prefixes "
                                     "or statement labels")
    sub.add_argument("--report", help="also write the JSON report to a file")
    sub.add_argument("--jobs", type=int, default=1, help="worker threads")
    sub.add_argument("--input", help="replay a serialized failure")
    sub.add_argument("--list-checks", action="store_true",
                     help="list check names and exit")
    sub.set_defaults(func=cmd_verify)

    sub = commands.add_parser("example", parents=[common],
                              help="the three-dimensional example pair")
    sub.add_argument("--golden", help="golden JSON file to compare with")
    sub.set_defaults(func=cmd_example)
    return parser


def _overrides(args):
    """Tolerances given on the command line; these beat the input file."""
    overrides = {}
    if args.tol_rank is not None:
        overrides["rank_eps"] = args.tol_rank
    if args.tol_comm is not None:
        overrides["comm_eps"] = args.tol_comm
    return overrides


def _tolerance(args):
    return replace(DEFAULT_TOLERANCE, **_overrides(args))


def main(argv=None):
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        return ex.code
    logging.basicConfig(
        level=(logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, _tolerance(args))
    except PreconditionError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_USAGE
    except SynapticError as ex:
        log.debug("command failed", exc_info=True)
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
