"""Command-line interface: ``lrsec {code,design,analyze,distance,simulate}``.

Exit codes: 0 on success, 1 on runtime or estimator failure, 2 on usage or
parse errors.  A ``--config`` file of ``key = value`` lines supplies defaults
that explicit flags override.  ``LRSEC_WORKERS`` sets the default worker
count.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import circuits as circ
from . import codes
from . import decoder as dec
from . import designer as des
from . import gf2
from . import gross
from . import lrcsched as ls
from . import montecarlo as mc
from . import residual as res
from .exceptions import EstimatorError, ParseError

log = logging.getLogger("lrsec")


class UsageError(Exception):
    """Bad arguments detected after argparse."""


# ---------------------------------------------------------------------------
# helpers


def _classical(spec):
    """Classical check matrix from ``repN``, ``ringN``, ``hamming`` or a matrix file."""
    if spec.startswith("rep") and spec[3:].isdigit():
        return codes.repetition_checks(int(spec[3:]))
    if spec.startswith("ring") and spec[4:].isdigit():
        return codes.periodic_repetition_checks(int(spec[4:]))
    if spec == "hamming":
        return codes.hamming_checks()
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"unknown classical code {spec!r}")
    text = path.read_text()
    try:
        return gf2.loads_dense(text)
    except ParseError:
        return gf2.loads_alist(text)


def _terms(text):
    """``"3,0 0,1 0,2"`` -> ``((3, 0), (0, 1), (0, 2))``."""
    try:
        return tuple(tuple(int(v) for v in t.split(",")) for t in text.split())
    except ValueError:
        raise UsageError(f"bad monomial list {text!r}") from None


def load_code_arg(args):
    """Resolve ``--code`` (builtin name or bundle path)."""
    name = args.code
    if name in codes.BUILTIN_CODES:
        return codes.builtin_code(name)
    path = Path(name)
    if not path.exists():
        raise ParseError(f"cannot read code {name!r}: no such builtin or file")
    return codes.load_code(path)


def _write(path, text):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _schedule(code, kind, seed):
    if kind == "lrc":
        part = ls.Partition.natural(code) if code.left is not None else ls.partition_search(code, rng_seed=seed)
        return ls.minimal_lrc(code, part, rng_seed=seed)
    if kind == "design":
        return des.LrcDesigner(rng_seed=seed, cap=1000).fit(code).best_.schedule
    if kind == "alternating":
        return ls.schedule_from_orders(code, [list(np.flatnonzero(r)) for r in code.hx],
                                       [list(np.flatnonzero(r)) for r in code.hz], name="alternating")
    raise UsageError(f"unknown schedule kind {kind!r}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_code(args):
    kind = args.kind
    if kind == "hgp":
        code = codes.hgp(_classical(args.a), _classical(args.b), name=f"hgp({args.a},{args.b})")
    elif kind == "bb":
        if not (args.l and args.m and args.a and args.b):
            raise UsageError("bb needs --l, --m, --a and --b")
        code = codes.bivariate_bicycle(args.l, args.m, _terms(args.a), _terms(args.b), name="bb")
    elif kind == "lp":
        code = codes.lifted_product(*codes.fb_to_lifted_product(codes.TwistSpec(codes.FB126_TWISTS, 9)), name="lp126")
    elif kind in codes.BUILTIN_CODES:
        code = codes.builtin_code(kind)
    else:
        path = Path(kind)
        if not path.exists():
            raise UsageError(f"unknown code {kind!r}")
        code = codes.load_code(path)
    s = codes.degree_stats(code)
    print(f"name={code.name} n={code.n} k={code.k}")
    print(f"mx={code.hx.shape[0]} mz={code.hz.shape[0]} c_hxz={s.c_hxz} r_hxz={s.r_hxz}")
    if args.save:
        codes.save_code(code, args.save, sparse=args.alist)
        print(f"saved {args.save}")
    return 0


def cmd_design(args):
    code = load_code_arg(args)
    print(f"# seed={args.seed}")
    designer = des.LrcDesigner(partition=args.partition, coloring=args.coloring, cap=args.cap,
                               rerank=args.rerank, rng_seed=args.seed,
                               estimator=res.DistanceEstimator(method=args.method, rng_seed=args.seed,
                                                               trials=args.trials))
    ranked = designer.fit(code).candidates_
    best = ranked[0].schedule
    report = des.design_report(ranked, args.top)
    print(f"code={code.name} n={code.n} k={code.k} candidates={len(ranked)} depth={best.depth}")
    print(f"best delta_min={ranked[0].metrics.delta_min} tau_a={ranked[0].metrics.tau_a}")
    if args.out:
        _write(args.out, report)
    else:
        sys.stdout.write(report)
    if args.emit:
        out = Path(args.emit)
        _write(out / "schedule.txt", ls.dump_schedule(best))
        rounds = args.rounds or code.meta.get("distance") or 3
        noise = circ.NoiseBinding(args.p)
        for basis in ("X", "Z"):
            c = circ.build_memory_experiment(best, basis, rounds)
            _write(out / f"memory_{basis}.stim", circ.export_circuit_text(c, noise))
        print(f"emitted {out}")
    return 0


def _scan_estimator(args):
    return gross.default_scan_estimator(seed=args.seed, target=args.target, t_row=args.t_row,
                                        t_prior=args.t_prior)


def cmd_analyze(args):
    print(f"# seed={args.seed}")
    if args.what in ("gross-scan", "gross-uniform", "gross-3colour"):
        code = codes.builtin_code("gross")
        est = _scan_estimator(args)
        if args.what == "gross-scan":
            rows = gross.gross_single_check_scan(code, args.check, args.pauli, est)
            text = gross.scan_report(rows)
            print(f"classes={len(rows)} max_bound={max(r.bound for r in rows)} "
                  f"at_most_10={sum(r.bound <= 10 for r in rows)}")
        elif args.what == "gross-uniform":
            rows = gross.gross_uniform_tiling_scan(code, args.pauli, est)
            text = gross.scan_report(rows)
            print(f"classes={len(rows)} max_bound={max(r.bound for r in rows)}")
        else:
            combo = gross.default_scan_estimator(seed=args.seed, target=args.target,
                                                 t_row=args.combo_t_row, t_prior=args.t_prior)
            r = gross.gross_three_colour_scan(code, pauli=args.pauli, estimator=est, combo_estimator=combo)
            lines = ["stage,colour,classes,bounds"]
            lines.append(f"single,,{' '.join(map(str, r.single_survivors))},")
            for c, rows in r.per_colour.items():
                lines.append(f"colour,{c},{' '.join(str(cid) for cid, _ in rows)},"
                             f"{' '.join(str(w) for _, w in rows)}")
            for combo_ids, w in r.combinations:
                lines.append(f"combination,,{' '.join(map(str, combo_ids))},{w}")
            text = "\n".join(lines) + "\n"
            print(f"single={len(r.single_survivors)} per_colour="
                  f"{[len(v) for _, v in sorted(r.per_colour_survivors.items())]} "
                  f"combinations={len(r.combinations)} survivors={len(r.survivors)} "
                  f"cyclic={r.cyclically_related()}")
    elif args.what == "extended":
        code = load_code_arg(args)
        sched = _schedule(code, args.schedule, args.seed)
        rs = res.residual_set_for_schedule(sched)
        est = res.DistanceEstimator(method=args.method, rng_seed=args.seed)
        lines = ["pauli,residuals,d_ext,exact"]
        for pauli in ("X", "Z"):
            ext = res.extend_code(code, rs, pauli)
            if not ext.logical.any():
                continue
            w, _, exact = res.extended_distance(ext, est)
            lines.append(f"{pauli},{len(rs.of_type(pauli))},{w},{int(exact)}")
        text = "\n".join(lines) + "\n"
    else:
        raise UsageError(f"unknown analysis {args.what!r}")
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_distance(args):
    if args.circuit:
        path = Path(args.circuit)
        if not path.exists():
            raise ParseError(f"cannot read circuit {args.circuit!r}")
        c, noise = circ.parse_circuit_text(path.read_text())
        if noise.p == 0:
            noise = circ.NoiseBinding(args.p)
    else:
        code = load_code_arg(args)
        sched = _schedule(code, args.schedule, args.seed)
        c = circ.build_memory_experiment(sched, args.basis, args.rounds or 1)
        noise = circ.NoiseBinding(args.p)
    dem = circ.build_dem(c, noise)
    if args.dem_out:
        _write(args.dem_out, circ.dem_text(dem))
    print(f"# seed={args.seed} detectors={dem.num_detectors} mechanisms={dem.num_mechanisms}")
    if args.method == "exact":
        r = circ.exact_circuit_distance(dem, w_max=args.w_max)
        print(str(r) if r.weight is None else f"{r} count={r.count}")
    else:
        est = dec.AdaptiveEstimator(t_row=args.t_row, t_prior=args.t_prior, random_state=args.seed)
        r = est.estimate(dem.H, dem.L)
        print(f"bound {r.weight} after {r.decode_calls} decodes")
    return 0


def cmd_simulate(args):
    code = load_code_arg(args)
    sched = _schedule(code, args.schedule, args.seed)
    p_list = [float(v) for v in args.p.split(",") if v.strip()] if args.p else []
    print(f"# seed={args.seed} workers={args.workers}")
    cfg = dec.DecoderConfig(max_iter=args.max_iter, osd_order=args.osd_order)
    rows = mc.sweep(sched, p_list, args.shots, args.out, rounds=args.rounds, rng_seed=args.seed, cfg=cfg,
                    schedule_id=args.schedule, workers=args.workers, idle_scale=args.idle_scale)
    for row in rows:
        print(",".join(map(str, row)))
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _common(p):
    p.add_argument("--seed", type=int, default=0, help="base random seed")
    p.add_argument("--config", help="key = value defaults file")
    p.add_argument("--out", help="output file (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(prog="lrsec", description="Left-right syndrome extraction toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("code", help="build or inspect a code")
    p.add_argument("kind", help="gross, fb126, hgp625, steane, rep3, hgp13, hgp, bb, lp or a bundle path")
    p.add_argument("--a", help="hgp: classical code A; bb: monomials of A as 'i,j i,j ...'")
    p.add_argument("--b", help="hgp: classical code B; bb: monomials of B")
    p.add_argument("--l", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--save", help="write a code bundle here")
    p.add_argument("--alist", action="store_true", help="save matrices in alist form")
    _common(p)
    p.set_defaults(func=cmd_code)

    p = sub.add_parser("design", help="rank LRC candidates and export the best")
    p.add_argument("--code", required=True)
    p.add_argument("--partition", default="natural", choices=["natural", "search"])
    p.add_argument("--coloring", default="auto", choices=["auto", "minimal", "concentrated"])
    p.add_argument("--cap", type=int, default=10_000)
    p.add_argument("--rerank", type=int, default=0)
    p.add_argument("--method", default="auto", choices=["auto", "exact", "simple", "adaptive"])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--rounds", type=int)
    p.add_argument("--p", type=float, default=1e-3)
    p.add_argument("--emit", help="directory for the schedule dump and circuits")
    _common(p)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("analyze", help="residual and extended-code analyses")
    p.add_argument("what", choices=["gross-scan", "gross-uniform", "gross-3colour", "extended"])
    p.add_argument("--code", default="gross")
    p.add_argument("--pauli", default=None, choices=["X", "Z"])
    p.add_argument("--check", type=int, default=0)
    p.add_argument("--schedule", default="lrc", choices=["lrc", "design", "alternating"])
    p.add_argument("--method", default="auto", choices=["auto", "exact", "simple", "adaptive"])
    p.add_argument("--t-row", type=int, default=200)
    p.add_argument("--t-prior", type=int, default=10)
    p.add_argument("--combo-t-row", type=int, default=1000)
    p.add_argument("--target", type=int, default=10)
    _common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("distance", help="circuit distance of a circuit file or a code's memory circuit")
    p.add_argument("--circuit", help="circuit text file")
    p.add_argument("--code")
    p.add_argument("--schedule", default="lrc", choices=["lrc", "design", "alternating"])
    p.add_argument("--basis", default="Z", choices=["X", "Z"])
    p.add_argument("--rounds", type=int)
    p.add_argument("--p", type=float, default=1e-3)
    p.add_argument("--method", default="exact", choices=["exact", "estimate"])
    p.add_argument("--w-max", type=int, default=6)
    p.add_argument("--t-row", type=int, default=50)
    p.add_argument("--t-prior", type=int, default=10)
    p.add_argument("--dem-out", help="write the DEM text here")
    _common(p)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("simulate", help="Monte-Carlo sweep to CSV")
    p.add_argument("--code", required=True)
    p.add_argument("--schedule", default="lrc", choices=["lrc", "design", "alternating"])
    p.add_argument("--p", default="1e-3", help="comma-separated noise strengths")
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--rounds", type=int)
    p.add_argument("--workers", type=int, default=int(os.environ.get("LRSEC_WORKERS", "1")))
    p.add_argument("--max-iter", type=int, default=mc.SIM_CONFIG.max_iter)
    p.add_argument("--osd-order", type=int, default=mc.SIM_CONFIG.osd_order)
    p.add_argument("--idle-scale", type=float, default=1.0)
    _common(p)
    p.set_defaults(func=cmd_simulate, out="simulate.csv")
    return parser


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment.  Keys use flag names."""
    out = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=ln)
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        unknown = sorted(set(cfg) - set(known))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**{k: (known[k].type(v) if known[k].type else v) for k, v in cfg.items()})
        args = parser.parse_args(argv)
    return args


def main(argv=None):
    parser = build_parser()
    try:
        args = _parse(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.command == "analyze" and args.pauli is None:
        args.pauli = "Z" if args.what == "gross-3colour" else "X"
    try:
        return args.func(args)
    except (UsageError, ParseError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EstimatorError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
