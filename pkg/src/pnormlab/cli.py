"""Command-line entry point: ``pnormlab <command> [options]``.

Exit codes: 0 success, 1 replay mismatch, 2 invalid parameters,
3 memory guard tripped.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import tempfile

from . import experiments as ex
from .entropy import parse_order
from .linalg import MemoryGuardError
from .records import append_record, read_records

EXIT_INVALID = 2
EXIT_MEMORY = 3


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _order(text: str) -> float:
    try:
        return parse_order(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pnormlab", description=__doc__.splitlines()[0])
    parser.add_argument("--records", default="experiments.jsonl",
                        help="JSONL store that receives one record per command")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default):
        p.add_argument("--seed", type=_u64, default=0)
        p.add_argument("--out", default=out_default)

    def estimator(p, samples, restarts, iters):
        p.add_argument("--samples", type=int, default=samples)
        p.add_argument("--restarts", type=int, default=restarts)
        p.add_argument("--max-iters", type=int, default=iters)

    sp = sub.add_parser("spectrum", help="spectrum of (N x conj N)(Phi) for one random channel")
    common(sp, "spectrum.csv")
    sp.add_argument("--dim-a", type=int, default=24)
    sp.add_argument("--dim-b", type=int, default=24)
    sp.add_argument("--dim-r", type=int, default=3)
    sp.add_argument("--svg", default=None, help="also write an SVG plot here")

    vp = sub.add_parser("violation", help="min-output-entropy gap for a random Stinespring channel")
    common(vp, "violation.json")
    vp.add_argument("--p", type=_order, default=2.0)
    vp.add_argument("--dim-a", type=int, default=24)
    vp.add_argument("--dim-b", type=int, default=24)
    vp.add_argument("--dim-s", type=int, default=192)
    estimator(vp, 10_000, 16, 200)

    rp = sub.add_parser("ru-violation", help="random unitary channel: overlap vs eps-randomizing bound")
    common(rp, "ru_violation.json")
    rp.add_argument("--p", type=_order, default=4.0)
    rp.add_argument("--d", type=int, default=32)
    rp.add_argument("--n", type=int, default=4096)
    estimator(rp, 128, 4, 40)

    pp = sub.add_parser("purity", help="exact and Monte Carlo average output purity")
    common(pp, "purity.json")
    pp.add_argument("--dim-a", type=int, default=3)
    pp.add_argument("--dim-b", type=int, default=3)
    pp.add_argument("--dim-s", type=int, default=4)
    pp.add_argument("--mc-samples", type=int, default=10_000)

    bp = sub.add_parser("bounds", help="closed-form subspace and Lipschitz bounds")
    bp.add_argument("--p", type=_order, default=math.inf)
    bp.add_argument("--dim-a", type=int, default=1024)
    bp.add_argument("--dim-b", type=int, default=1024)
    bp.add_argument("--alpha", type=float, default=0.5)
    bp.add_argument("--delta", type=float, default=0.5)
    bp.add_argument("--gamma", type=float, default=3.0)

    rep = sub.add_parser("replay", help="re-run a stored record and compare scalar outputs")
    rep.add_argument("--line", type=int, default=-1, help="record index in the store (default: last)")
    return parser


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def _print_table(rows) -> None:
    width = max(len(k) for k, _ in rows)
    for key, value in rows:
        print(f"{key:<{width}}  {_fmt(value)}")


def _dispatch(args) -> int:
    if args.command == "spectrum":
        rec = ex.run_spectrum(args.dim_a, args.dim_b, args.dim_r, args.seed, args.out, args.svg)
        o = rec.outputs
        _print_table([
            ("dim_s", o["dim_s"]),
            ("lambda_max", o["lambda_max"]),
            ("reference |S|/(|A||B|)", o["reference_top"]),
            ("reference (1-|S|/(|A||B|))/|A|^2", o["reference_flat"]),
            ("tail purity", o["tail_purity"]),
            ("H_1 (nats)", o["h1"]),
            ("H_2 (nats)", o["h2"]),
            ("spectrum csv", args.out),
        ])
    elif args.command == "violation":
        report, rec = ex.run_violation(args.p, args.dim_a, args.dim_b, args.dim_s, args.seed,
                                       args.samples, args.restarts, args.max_iters, args.out)
        o = rec.outputs
        _print_table([
            ("p", o["p"]),
            ("hmin_hat N (upper-bound estimate)", report.hmin_hat_n),
            ("  sampling stage", o["sampling_hat_n"]),
            ("  optimizer stage", o["optimizer_hat_n"]),
            ("hmin_hat conj N (upper-bound estimate)", report.hmin_hat_nbar),
            ("H_p((N x conj N)(Phi)) (exact)", report.h_product_phi),
            ("ceiling from |S|/(|A||B|)", report.bound_check),
            ("gap (upper-bound estimate)", report.gap),
            ("ceiling respected", report.consistent),
            ("violation shown", report.gap > 0),
        ])
    elif args.command == "ru-violation":
        report, rec = ex.run_ru_violation(args.p, args.d, args.n, args.seed, args.samples,
                                          args.restarts, args.max_iters, args.out)
        _print_table([
            ("p", rec.outputs["p"]),
            ("1/n", report.one_over_n),
            ("<Phi|(N x conj N)(Phi)|Phi> (lower bound on nu_p)", report.phi_overlap),
            ("epsilon_hat (lower-bound estimate)", report.epsilon_hat),
            ("((1+eps)/d)^(2-2/p) (conditional upper bound)", report.conditional_upper_bound),
            ("verdict", rec.outputs["verdict"]),
        ])
    elif args.command == "purity":
        rec = ex.run_purity(args.dim_a, args.dim_b, args.dim_s, args.mc_samples, args.seed, args.out)
        o = rec.outputs
        _print_table([
            ("exact", o["exact"]),
            ("monte carlo mean", o["mc_mean"]),
            ("monte carlo stderr", o["mc_stderr"]),
            ("difference / stderr", o["difference_in_stderr"]),
            ("leading term |S|^2/(|A||B|)^2", o["leading_term"]),
            ("(exact - leading) * |A|^2", o["correction_times_dim_a_sq"]),
        ])
    elif args.command == "bounds":
        rec = ex.run_bounds(args.p, args.dim_a, args.dim_b, args.alpha, args.delta, args.gamma)
        o = rec.outputs
        prob = o["failure_prob_bound"]
        _print_table([
            ("|S| guaranteed", o["dim_s"]),
            ("|S| before rounding", o["dim_s_unrounded"]),
            ("failure probability bound", "overflow" if prob is None else prob),
            ("ln failure probability bound", o["log_failure_prob_bound"]),
            ("entropy floor (nats)", o["entropy_floor"]),
            ("beta", o["beta"]),
            ("Lipschitz bound", o["lipschitz_bound"]),
        ])
        if o["vacuous"]:
            print("bound vacuous at this scale")
    elif args.command == "replay":
        old = read_records(args.records)[args.line]
        with tempfile.TemporaryDirectory() as tmp:
            new = ex.replay(old, tmp)
        same = ex.scalar_outputs(old) == ex.scalar_outputs(new)
        print(json.dumps({"command": old.command, "identical": same}))
        return 0 if same else 1
    append_record(args.records, rec)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except MemoryGuardError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MEMORY
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
