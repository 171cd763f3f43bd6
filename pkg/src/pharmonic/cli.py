"""Command-line front end.

Exit codes: 0 pass, 1 verification failure, 2 bad input or configuration,
3 subgroup spec rejected (parity subsets not spanning).

Every CSV starts with a comment row carrying the config hash and seed; the
same config and seed always give byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import random
import sys
from pathlib import Path

import numpy as np

from . import periodic_finite as pf
from . import periodic_infinite as pi
from .plaplace import ConvergenceError, check_p, dirichlet_solve, p_laplacian, random_edge_resistance
from .subgroup import FiniteIndex, NonSpanningSpec, PairSpec, coset_index, parity_label, quotient_graph, spec_from_json, validate_and_index
from .word_group import ReducedWord, ball, random_word, word_from_json

SPREAD_TOL = 1e-6


class UsageError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def load_json(arg: str):
    """Inline JSON, or a path to a JSON file."""
    try:
        is_file = Path(arg).is_file()
    except OSError:  # e.g. inline JSON longer than a file name may be
        is_file = False
    if is_file:
        return json.loads(Path(arg).read_text())
    return json.loads(arg)


def parse_range(text: str) -> range:
    try:
        a, b = (int(s) for s in text.split(":"))
    except ValueError:
        raise UsageError(f"range must look like A:B, got {text!r}") from None
    if b < a:
        raise UsageError("range end precedes its start")
    return range(a, b + 1)


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


class CsvOut:
    """Collects rows, then writes them to a file or stdout in one go."""

    def __init__(self, command: str, config: dict, seed, header: list[str]):
        self.buf = io.StringIO()
        self.w = csv.writer(self.buf, lineterminator="\n")
        self.buf.write(f"# pharmonic {command} config_hash={config_hash(config)} seed={seed}\n")
        self.w.writerow(header)

    def row(self, *values):
        self.w.writerow([fmt(v) for v in values])

    def comment(self, text: str):
        self.buf.write(f"# {text}\n")

    def flush(self, out: str | None):
        if out:
            Path(out).write_text(self.buf.getvalue())
        else:
            sys.stdout.write(self.buf.getvalue())


def _spec(args, required=True):
    if args.spec is None:
        if required:
            raise UsageError("--spec is required")
        return None
    return spec_from_json(load_json(args.spec), args.k)


def _word(text: str, k: int) -> ReducedWord:
    return word_from_json(load_json(text), k)


def _check_tol(tol: float) -> float:
    if not tol > 0:
        raise UsageError("--tol must be positive")
    return tol


# -- subcommands ------------------------------------------------------------------------------

def cmd_coset(args) -> int:
    spec = _spec(args)
    x = _word(args.word, spec.k)
    if isinstance(spec, FiniteIndex):
        validate_and_index(spec)
        print(json.dumps(list(parity_label(x, spec))))
    else:
        print(coset_index(x, spec))
    return 0


def _function_and_resistance(args, spec):
    if isinstance(spec, FiniteIndex):
        q = quotient_graph(spec)
        if args.profile is None:
            raise UsageError("--profile is required for a finite-index spec")
        profile = [float(v) for v in load_json(args.profile)]
        if args.resistances:
            r = pf.resistances_from_json(load_json(args.resistances), q)
        else:
            r = pf.coset_resistances(q, {e: 1.0 for e in q.edges()})
        return pf.lift(profile, spec), pf.resistance_rule(spec, r), {"profile": profile, "resistances": pf.resistances_to_json(r)}
    if args.seq is None or args.member is None:
        raise UsageError("--seq and --member are required for a pair spec")
    seq = pi.sequence_from_json(load_json(args.seq))
    member = pi.member_from_json(load_json(args.member), seq)
    u = pi.CosetLift(member, spec, exact=True)
    return u, pi.sequence_resistance(seq, spec), {"sequence": seq.to_json(), "member": member.to_json()}


def cmd_laplacian(args) -> int:
    p = check_p(args.p)
    spec = _spec(args)
    x = _word(args.word, spec.k)
    u, r, extra = _function_and_resistance(args, spec)
    config = {"spec": spec.to_json(), "word": x.to_json(), "radius": args.radius, "p": p, **extra}
    out = CsvOut("laplacian", config, None, ["vertex", "residual"])
    worst = 0.0
    for v in ball(x, args.radius).vertices:
        res = p_laplacian(u, v, r, p)
        worst = max(worst, abs(res))
        out.row(json.dumps(v.to_json()), res)
    out.comment(f"max_abs_residual={fmt(worst)}")
    out.flush(args.out)
    if args.tol is not None:
        return 0 if worst <= _check_tol(args.tol) else 1
    return 0


def cmd_dirichlet(args) -> int:
    p = check_p(args.p)
    tol = _check_tol(args.tol)
    k = args.k
    member = None
    if args.seq is not None or args.member is not None:
        spec = _spec(args) if args.spec else PairSpec(1, 2, k)
        if not isinstance(spec, PairSpec):
            raise UsageError("family boundary data needs a pair spec")
        if args.seq is None or args.member is None:
            raise UsageError("--seq and --member go together")
        seq = pi.sequence_from_json(load_json(args.seq))
        member = pi.member_from_json(load_json(args.member), seq)
        k = spec.k
        r = pi.sequence_resistance(seq, spec)
        exact = pi.CosetLift(member, spec, exact=True)
        reference = lambda v: float(exact[v])  # noqa: E731
    else:
        r = random_edge_resistance(args.seed)
    center = _word(args.center, k)
    region = ball(center, args.radius)
    if member is not None:
        boundary = {v: reference(v) for v in region.boundary}
    else:
        rng = np.random.default_rng(args.seed)
        boundary = {v: float(rng.uniform(-1, 1)) for v in region.vertices if v in region.boundary}
    if args.xtol is not None:
        # step-size stop; for p < 2 residuals near flat edges sit at rounding level
        if not args.xtol > 0:
            raise UsageError("--xtol must be positive")
        sol = dirichlet_solve(region, boundary, r, p, math.inf, xtol=args.xtol)
    else:
        sol = dirichlet_solve(region, boundary, r, p, tol)
    config = {"k": k, "center": center.to_json(), "radius": args.radius, "p": p, "tol": tol, "xtol": args.xtol}
    if member is not None:
        config.update(sequence=member.sequence.to_json(), member=member.to_json(), spec=spec.to_json())
    out = CsvOut("dirichlet", config, args.seed, ["vertex", "boundary", "value"] + (["family_value"] if member else []))
    dev = 0.0
    for v in region.vertices:
        row = [json.dumps(v.to_json()), int(v in region.boundary), sol.values[v]]
        if member is not None:
            ref = reference(v)
            dev = max(dev, abs(ref - sol.values[v]))
            row.append(ref)
        out.row(*row)
    out.comment(f"residual={fmt(sol.residual)} sweeps={sol.sweeps}")
    if member is not None:
        out.comment(f"max_deviation_from_family={fmt(dev)}")
    out.flush(args.out)
    return 1 if member is not None and dev > args.check_tol else 0


def _t2_config(args) -> dict:
    cfg = load_json(args.config) if args.config else {}
    if args.spec is not None:
        cfg["spec"] = load_json(args.spec)
    cfg.setdefault("spec", {"finite": {"A": [[1]]}, "k": 2})
    if args.p is not None:
        cfg["p"] = args.p
    cfg.setdefault("p", 3.0)
    if args.starts is not None:
        cfg["starts"] = args.starts
    cfg.setdefault("starts", 10)
    return cfg


def cmd_verify_t2(args) -> int:
    cfg = _t2_config(args)
    tol = _check_tol(args.tol)
    spec = spec_from_json(cfg["spec"], args.k)
    if not isinstance(spec, FiniteIndex):
        raise UsageError("verify-t2 needs a finite-index spec")
    q = quotient_graph(spec)
    ps = cfg["p"] if isinstance(cfg["p"], list) else [cfg["p"]]
    ps = [check_p(p) for p in ps]
    starts = int(cfg["starts"])
    if starts < 0:
        raise UsageError("starts must be nonnegative")
    rng = np.random.default_rng(args.seed)
    if "resistances" in cfg:
        r = pf.resistances_from_json(cfg["resistances"], q)
    else:
        r = pf.random_coset_resistances(q, rng)
    resolved = {"spec": spec.to_json(), "p": ps, "starts": starts, "resistances": pf.resistances_to_json(r), "tol": tol}
    out = CsvOut("verify-t2", resolved, args.seed, ["k", "spec", "p", "start_id", "spread", "residual", "iterations"])
    spec_txt = json.dumps(spec.to_json(), separators=(",", ":"))
    worst_spread, worst_res = 0.0, 0.0
    for p in ps:
        for sid in range(starts + 1):
            # start 0 is constant; the rest are uniform in [-1, 1]^m
            start = np.zeros(q.size) if sid == 0 else rng.uniform(-1.0, 1.0, q.size)
            sol = pf.solve_periodic(q, r, p, start, tol)
            worst_spread = max(worst_spread, sol.spread)
            worst_res = max(worst_res, sol.residual)
            out.row(spec.k, spec_txt, p, sid, sol.spread, sol.residual, sol.iterations)
    ok = worst_spread <= SPREAD_TOL and worst_res <= tol
    out.comment(f"max_spread={fmt(worst_spread)} max_residual={fmt(worst_res)} {'PASS' if ok else 'FAIL'}")
    out.flush(args.out)
    return 0 if ok else 1


def cmd_family(args) -> int:
    if args.seq is None:
        raise UsageError("--seq is required")
    seq = pi.sequence_from_json(load_json(args.seq))
    member = pi.FamilyMember(args.family, args.amplitude, args.offset, seq)
    rng_n = parse_range(args.range)
    config = {"sequence": seq.to_json(), "member": member.to_json(), "range": [rng_n.start, rng_n.stop - 1]}
    out = CsvOut("family", config, None, ["n", "u_n"])
    values = [float(pi.evaluate(member, n, exact=True)) for n in rng_n]
    for n, v in zip(rng_n, values):
        out.row(n, v)
    out.flush(args.out)
    if args.plot:
        _plot(list(rng_n), values, member, args.plot)
    return 0


def _plot(ns, values, member, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "pharmonic"
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(ns, values, marker=".", lw=1)
    ax.set_xlabel("coset index n")
    ax.set_ylabel("u_n")
    ax.set_title(f"{member.family}, amplitude {member.amplitude:g}, offset {member.offset:g}")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _t4_combination(args, cfg, rng):
    if args.random is not None:
        within = int(rng.integers(0, 2**31)) if args.within_random else None
        seq = pi.random_sequence(rng, within_seed=within)
        return pi.random_combination(rng, seq, args.random)
    if "sequence" not in cfg and args.seq is None:
        raise UsageError("verify-t4 needs --random Q or a config with a sequence")
    default_seq = pi.sequence_from_json(cfg["sequence"] if "sequence" in cfg else load_json(args.seq))
    members = tuple(pi.member_from_json(m, default_seq) for m in cfg["members"])
    coeffs = tuple(float(t) for t in cfg.get("coefficients", [1.0] * len(members)))
    return pi.Combination(members, coeffs)


def cmd_verify_t4(args) -> int:
    cfg = load_json(args.config) if args.config else {}
    p = check_p(args.p if args.p is not None else cfg.get("p", 2.7))
    tol = _check_tol(args.tol)
    n_range = parse_range(args.range)
    rng = np.random.default_rng(args.seed)
    c = _t4_combination(args, cfg, rng)
    k = int(cfg.get("k", args.k))
    pair_ij = cfg.get("pair", [1, 2])
    pair = PairSpec(int(pair_ij[0]), int(pair_ij[1]), k)
    pyrng = random.Random(args.seed)
    centers = [random_word(k, pyrng.randint(0, args.radius), pyrng) for _ in range(args.centers)]
    report = pi.verify_combination(c, p, n_range, tol, pair=pair, radius=args.radius, centers=centers)
    config = {
        "p": p,
        "tol": tol,
        "range": [n_range.start, n_range.stop - 1],
        "k": k,
        "pair": [pair.i, pair.j],
        "radius": args.radius,
        "centers": [x.to_json() for x in centers],
        "sequence": c.sequence.to_json(),
        "members": [m.to_json() for m in c.members],
        "coefficients": list(c.coefficients),
    }
    out = CsvOut("verify-t4", config, args.seed, ["n", "v_n", "residual"])
    v = pi.combine(c)
    for n in n_range:
        out.row(n, float(v(n, exact=True)), report.coset.residuals[n])
    vmax = max((rep.max_residual for rep in report.vertex), default=0.0)
    out.comment(f"coset_max_residual={fmt(report.coset.max_residual)} vertex_max_residual={fmt(vmax)} {'PASS' if report.passed else 'FAIL'}")
    out.flush(args.out)
    if args.out:
        print(f"{'PASS' if report.passed else 'FAIL'} max_residual={fmt(report.max_residual)}")
    return 0 if report.passed else 1


# -- parser -----------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pharmonic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, p_default=None, tol_default=None):
        sp.add_argument("--k", type=int, default=2, help="tree order when the spec does not carry one")
        sp.add_argument("--spec", help="subgroup spec (JSON file or inline JSON)")
        sp.add_argument("--seq", help="resistance sequence (JSON file or inline JSON)")
        sp.add_argument("--p", type=float, default=p_default)
        sp.add_argument("--tol", type=float, default=tol_default)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output file (default stdout)")

    sp = sub.add_parser("coset", help="coset label of a word")
    sp.add_argument("word", help="JSON array of generator indices, e.g. [1,3,2]")
    common(sp)
    sp.set_defaults(func=cmd_coset)

    sp = sub.add_parser("laplacian", help="p-Laplacian of a periodic function around a vertex")
    common(sp, p_default=2.0)
    sp.add_argument("--word", default="[]")
    sp.add_argument("--radius", type=int, default=0)
    sp.add_argument("--profile", help="coset values for a finite-index spec (JSON list)")
    sp.add_argument("--resistances", help='coset resistances, e.g. {"0-1": 1.0}')
    sp.add_argument("--member", help='family member, e.g. {"family": "U1", "amplitude": 1}')
    sp.set_defaults(func=cmd_laplacian)

    sp = sub.add_parser("dirichlet", help="p-energy minimiser on a ball")
    common(sp, p_default=2.0, tol_default=1e-10)
    sp.add_argument("--center", default="[]")
    sp.add_argument("--radius", type=int, default=4)
    sp.add_argument("--member", help="take boundary values from this family member")
    sp.add_argument("--check-tol", type=float, default=1e-6)
    sp.add_argument("--xtol", type=float, help="stop when no value moves more than this in a sweep (use for p < 2)")
    sp.set_defaults(func=cmd_dirichlet)

    sp = sub.add_parser("verify-t2", help="finite-index periodic solutions are constant")
    common(sp, tol_default=1e-10)
    sp.add_argument("--config", help='JSON: {"spec": ..., "p": 3.0, "resistances": {...}, "starts": N}')
    sp.add_argument("--starts", type=int)
    sp.set_defaults(func=cmd_verify_t2)

    sp = sub.add_parser("family", help="tabulate a U1/U2 family member")
    common(sp)
    sp.add_argument("--family", choices=["U1", "U2"], default="U1")
    sp.add_argument("--amplitude", type=float, default=1.0)
    sp.add_argument("--offset", type=float, default=0.0)
    sp.add_argument("--range", default="-10:10")
    sp.add_argument("--plot", help="also write an SVG line chart here")
    sp.set_defaults(func=cmd_family)

    sp = sub.add_parser("verify-t4", help="linear combinations of family members stay p-harmonic")
    common(sp, tol_default=1e-10)
    sp.add_argument("--config", help='JSON: {"sequence": ..., "members": [...], "coefficients": [...], "p": ...}')
    sp.add_argument("--random", type=int, metavar="Q", help="draw a seeded random combination of up to Q members")
    sp.add_argument("--within-random", action="store_true", help="randomise within-coset resistances")
    sp.add_argument("--range", default="-30:30")
    sp.add_argument("--radius", type=int, default=6)
    sp.add_argument("--centers", type=int, default=1)
    sp.set_defaults(func=cmd_verify_t4)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonSpanningSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
