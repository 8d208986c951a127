"""Command-line front end.

Subcommands: resolvability, oneshot, exponent, simulate, stability,
anticontractivity, binary, verify.  Input problems are JSON documents with
explicit "channel"/"joint", "target", "params" and "units" keys; outputs are
CSV with a units column (and optional matplotlib figures next to the CSV via
--plot-dir).  Exit codes: 0 success, 2 validation error, 3 guard exceeded,
64 unknown subcommand.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import codesim, report
from .anticontractivity import NormExponentQuery, binary_gamma, brute_force_gamma, \
    gamma_asymptotic, gamma_single_letter
from .oneshot import OneShotInstance, beta_bound, oneshot_bounds
from .prob import Channel, FiniteDistribution, GuardExceededError, JointDistribution
from .resolvability import (
    ResolvabilityProblem,
    binary_closed_forms,
    dual_asymptotic,
    forward_asymptotic,
    iid_exponent,
    r_min,
    resolvability_rate,
    reverse_asymptotic,
    typical_exponent,
)
from .stability import StabilityInstance, binary_ot, binary_qstability, exact_set_stability, \
    qstability_bound
from .verify import SUITES, run_suite

LN2 = math.log(2.0)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_GUARD = 3
EXIT_USAGE = 64


class _CliError(Exception):
    pass


def _load_problem(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise _CliError(f"cannot read problem file {path}: {e}")
    if not isinstance(doc, dict):
        raise _CliError("problem file must hold a JSON object")
    return doc


def _as_floats(rows):
    def conv(v):
        if isinstance(v, str):
            return float(v)
        return float(v)
    if rows and isinstance(rows[0], (list, tuple)):
        return [[conv(v) for v in r] for r in rows]
    return [conv(v) for v in rows]


def _channel_from(args, doc: dict | None) -> Channel:
    if getattr(args, "bsc", None) is not None:
        return Channel.bsc(args.bsc)
    if doc and "channel" in doc:
        return Channel(np.asarray(_as_floats(doc["channel"])))
    if doc and "joint" in doc:
        return JointDistribution(np.asarray(_as_floats(doc["joint"]))).channel_y_given_x()
    raise _CliError("no channel given (use --channel FILE or --bsc EPS)")


def _target_from(args, doc: dict | None, channel: Channel) -> FiniteDistribution:
    if doc and "target" in doc:
        return FiniteDistribution(np.asarray(_as_floats(doc["target"])))
    return FiniteDistribution.uniform(channel.output_dim)


def _joint_from(args, doc: dict | None) -> JointDistribution:
    if getattr(args, "dsbs", None) is not None:
        return JointDistribution.dsbs(args.dsbs)
    if doc and "joint" in doc:
        return JointDistribution(np.asarray(_as_floats(doc["joint"])))
    if doc and "channel" in doc and "input" in doc:
        return JointDistribution.from_marginal_channel(
            FiniteDistribution(np.asarray(_as_floats(doc["input"]))),
            Channel(np.asarray(_as_floats(doc["channel"]))))
    raise _CliError("no joint given (use --joint FILE or --dsbs EPS)")


def _parse_q(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    if t == "-inf":
        return -math.inf
    return float(t)


def _emit(args, header, rows) -> None:
    text = report.csv_text(header, rows)
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rate_nats(args) -> float:
    if args.units == "bits":
        return args.rate * LN2
    return args.rate


def _value_out(v_nats: float, units: str) -> float:
    return v_nats / LN2 if units == "bits" else v_nats


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_resolvability(argv) -> int:
    ap = argparse.ArgumentParser(prog="renyi-lab resolvability", add_help=True)
    ap.add_argument("--channel", help="JSON problem file")
    ap.add_argument("--bsc", type=float, help="binary symmetric channel crossover")
    ap.add_argument("--q", type=_parse_q, required=True)
    ap.add_argument("--rate", type=float, required=True)
    ap.add_argument("--direction", choices=("forward", "reverse"), default="forward")
    ap.add_argument("--dual", action="store_true", help="also evaluate the dual formula")
    ap.add_argument("--units", choices=("nats", "bits"), default="nats")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("-o", "--output")
    ap.add_argument("--plot-dir")
    args = ap.parse_args(argv)
    doc = _load_problem(args.channel) if args.channel else None
    W = _channel_from(args, doc)
    PY = _target_from(args, doc, W)
    R = _rate_nats(args)
    prob = ResolvabilityProblem(W, PY, R, args.q, args.direction)
    res = forward_asymptotic(prob) if args.direction == "forward" else reverse_asymptotic(prob)
    rate = resolvability_rate(W, PY, args.q, args.direction)
    rows = [[args.direction, args.q, args.rate, _value_out(res.value, args.units),
             _value_out(res.gap, args.units), res.status,
             _value_out(rate, args.units), _value_out(r_min(W, PY), args.units), args.units]]
    header = ["direction", "q", "rate", "value", "certified_gap", "status",
              "resolvability_rate", "r_min", "units"]
    if args.dual:
        d = dual_asymptotic(prob)
        rows[0].insert(4, _value_out(d.value, args.units))
        header.insert(4, "dual_value")
    _emit(args, header, rows)
    return EXIT_OK


def _cmd_oneshot(argv) -> int:
    ap = argparse.ArgumentParser(prog="renyi-lab oneshot")
    ap.add_argument("--channel")
    ap.add_argument("--bsc", type=float)
    ap.add_argument("--q", type=_parse_q, required=True)
    ap.add_argument("--rate", type=float, required=True)
    ap.add_argument("--units", choices=("nats", "bits"), default="nats")
    ap.add_argument("-o", "--output")
    args = ap.parse_args(argv)
    doc = _load_problem(args.channel) if args.channel else None
    W = _channel_from(args, doc)
    PY = _target_from(args, doc, W)
    QX = FiniteDistribution(np.asarray(_as_floats(doc["input"]))) if doc and "input" in doc \
        else FiniteDistribution.uniform(W.input_dim)
    inst = OneShotInstance(QX, W, PY, _rate_nats(args), args.q)
    b = oneshot_bounds(inst)
    rows = []
    if b.log_upper is not None:
        rows.append(["upper", b.log_upper, "log-moment", "nats"])
    if b.log_upper_12 is not None:
        rows.append(["upper_q_in_1_2", b.log_upper_12, "log-moment", "nats"])
    if b.log_lower is not None:
        rows.append(["lower", b.log_lower, "log-moment", "nats"])
    t_grid = np.linspace(1.0, args.q, 9)
    for t in t_grid:
        bb = beta_bound(float(t), inst)
        rows.append([f"log_beta(t={t:g})", bb.log_beta, f"s*={bb.s_star:.6g}", "nats"])
    _emit(args, ["bound", "value", "note", "units"], rows)
    return EXIT_OK


def _cmd_exponent(argv) -> int:
    ap = argparse.ArgumentParser(prog="renyi-lab exponent")
    ap.add_argument("--channel")
    ap.add_argument("--dsbs", type=float)
    ap.add_argument("--q", type=_parse_q, required=True)
    ap.add_argument("--rate", type=float, required=True)
    ap.add_argument("--typical-eps", type=float)
    ap.add_argument("--units", choices=("nats", "bits"), default="nats")
    ap.add_argument("-o", "--output")
    args = ap.parse_args(argv)
    doc = _load_problem(args.channel) if args.channel else None
    joint = _joint_from(args, doc)
    R = _rate_nats(args)
    rep = iid_exponent(joint, args.q, R)
    rows = [["iid", args.q, args.rate, _value_out(rep.exponent, args.units), rep.mechanism,
             rep.no_decay, rep.warning or "", args.units]]
    if args.typical_eps is not None:
        tr = typical_exponent(joint, args.q, R, args.typical_eps)
        rows.append(["typical", args.q, args.rate, _value_out(tr.exponent, args.units),
                     tr.mechanism, tr.no_decay, tr.warning or "", args.units])
    _emit(args, ["ensemble", "q", "rate", "exponent", "mechanism", "no_decay",
                 "warning", "units"], rows)
    return EXIT_OK


def _cmd_simulate(argv) -> int:
    ap = argparse.ArgumentParser(prog="renyi-lab simulate")
    ap.add_argument("--channel")
    ap.add_argument("--bsc", type=float)
    ap.add_argument("--q", type=_parse_q, required=True)
    ap.add_argument("--rate", type=float, required=True)
    ap.add_argument("--n", required=True, help="blocklength range A:B or comma list")
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--kind", choices=("iid", "typical"), default="iid")
    ap.add_argument("--delta", type=float, default=0.2)
    ap.add_argument("--units", choices=("nats", "bits"), default="nats")
    ap.add_argument("-o", "--output")
    ap.add_argument("--plot-dir")
    args = ap.parse_args(argv)
    doc = _load_problem(args.channel) if args.channel else None
    W = _channel_from(args, doc)
    PY = _target_from(args, doc, W)
    QX = FiniteDistribution(np.asarray(_as_floats(doc["input"]))) if doc and "input" in doc \
        else FiniteDistribution.uniform(W.input_dim)
    if ":" in args.n:
        a, b = args.n.split(":")
        n_list = list(range(int(a), int(b) + 1))
    else:
        n_list = [int(v) for v in args.n.split(",")]
    R = _rate_nats(args)
    pred = iid_exponent(JointDistribution.from_marginal_channel(QX, W), args.q, R).exponent \
        if args.kind == "iid" else None
    rep = codesim.exponent_estimate(W, PY, QX, R, n_list, args.q, args.trials, args.seed,
                                    kind=args.kind,
                                    delta=args.delta if args.kind == "typical" else None,
                                    predicted=pred)
    rows = [[n, rep.per_n[n][0], rep.per_n[n][1], rep.effective_rates[n], rep.slope,
             rep.stderr, rep.predicted if rep.predicted is not None else "",
             rep.degenerate, args.seed, "nats"] for n in sorted(rep.per_n)]
    _emit(args, ["n", "divergence", "mean_moment", "effective_rate", "slope", "stderr",
                 "predicted_exponent", "degenerate", "seed", "units"], rows)
    if args.plot_dir:
        report.render_regression(rep, args.plot_dir)
    return EXIT_OK


def _cmd_stability(argv) -> int:
    ap = argparse.ArgumentParser(prog="renyi-lab stability")
    ap.add_argument("--joint")
    ap.add_argument("--dsbs", type=float)
    ap.add_argument("--q", type=_parse_q, required=True)
    ap.add_argument("--alpha", type=float, required=True, help="exponent of the set probability")
    ap.add_argument("--units", choices=("nats", "bits"), default="nats")
    ap.add_argument("-o", "--output")
    args = ap.parse_args(argv)
    doc = _load_problem(args.joint) if args.joint else None
    joint = _joint_from(args, doc)
    alpha = args.alpha * LN2 if args.units == "bits" else args.alpha
    inst = StabilityInstance(joint, args.q, alpha)
    res = qstability_bound(inst)
    rows = [["general", args.q, args.alpha, _value_out(res.value, args.units),
             _value_out(res.gap, args.units), res.status, args.units]]
    if args.dsbs is not None:
        bq = binary_qstability(args.dsbs, args.q, alpha / LN2)
        rows.append(["binary-closed-form", args.q, alpha / LN2, bq.bound_bits, 0.0,
                     f"statement {bq.statement}", "bits"])
    _emit(args, ["route", "q", "alpha", "bound", "gap", "status", "units"], rows)
    return EXIT_OK


def _cmd_anticontractivity(argv) -> int:
    ap = argparse.ArgumentParser(prog="renyi-lab anticontractivity")
    ap.add_argument("--joint")
    ap.add_argument("--dsbs", type=float)
    ap.add_argument("--p", type=_parse_q, required=True)
    ap.add_argument("--q", type=_parse_q, required=True)
    ap.add_argument("--side", choices=("lower", "upper"), default="upper")
    ap.add_argument("--blocklength", default="1", help="integer n or 'inf'")
    ap.add_argument("--units", choices=("nats", "bits"), default="nats")
    ap.add_argument("-o", "--output")
    args = ap.parse_args(argv)
    doc = _load_problem(args.joint) if args.joint else None
    joint = _joint_from(args, doc)
    n = math.inf if args.blocklength.lower() == "inf" else int(args.blocklength)
    query = NormExponentQuery(joint, args.p, args.q, args.side, n)
    if n == math.inf:
        g = gamma_asymptotic(query)
        rows = [["asymptotic", args.side, args.p, args.q, _value_out(g.value, args.units),
                 g.clause, g.symbolic, args.units]]
    elif n == 1:
        g = gamma_single_letter(query)
        rows = [["single-letter", args.side, args.p, args.q, _value_out(g.value, args.units),
                 g.clause, g.symbolic, args.units]]
    else:
        r = brute_force_gamma(joint, int(n), args.p, args.q, args.side)
        rows = [[f"brute-force n={n}", args.side, args.p, args.q,
                 _value_out(r.value, args.units), "renyi characterization", False, args.units]]
    if args.dsbs is not None:
        bg = binary_gamma(args.dsbs, args.p, args.q)
        v = bg.gamma_lower_bits if args.side == "lower" else bg.gamma_upper_bits
        ach = bg.achiever_lower if args.side == "lower" else bg.achiever_upper
        rows.append(["binary-closed-form", args.side, args.p, args.q,
                     v if v is not None else "", ach or "", True, "bits"])
    _emit(args, ["route", "side", "p", "q", "value", "clause_or_achiever", "symbolic",
                 "units"], rows)
    return EXIT_OK


def _cmd_binary(argv) -> int:
    ap = argparse.ArgumentParser(prog="renyi-lab binary")
    ap.add_argument("--eps", type=float, required=True)
    ap.add_argument("--q", type=_parse_q, required=True)
    ap.add_argument("--rate", type=float, required=True, help="rate in bits")
    ap.add_argument("--p", type=_parse_q, help="also report anti-contractivity for (p, q)")
    ap.add_argument("--alpha", type=float, help="also report q-stability at this alpha (bits)")
    ap.add_argument("-o", "--output")
    args = ap.parse_args(argv)
    cf = binary_closed_forms(args.eps, args.q, args.rate)
    rows = [
        ["forward_bits", cf.forward_bits],
        ["reverse_bits", cf.reverse_bits],
        ["lambda_star_forward", cf.lambda_star_forward if cf.lambda_star_forward is not None else ""],
        ["lambda_star_reverse", cf.lambda_star_reverse if cf.lambda_star_reverse is not None else ""],
        ["forward_rate_bits", cf.forward_rate_bits],
        ["reverse_rate_bits", cf.reverse_rate_bits],
    ]
    if args.alpha is not None:
        bq = binary_qstability(args.eps, args.q, args.alpha)
        rows.append([f"qstability_bits_stmt{bq.statement}", bq.bound_bits])
    if args.p is not None:
        bg = binary_gamma(args.eps, args.p, args.q)
        if bg.gamma_lower_bits is not None:
            rows.append(["gamma_lower_bits", bg.gamma_lower_bits])
        if bg.gamma_upper_bits is not None:
            rows.append(["gamma_upper_bits", bg.gamma_upper_bits])
    rows = [r + ["bits"] for r in rows]
    _emit(args, ["quantity", "value", "units"], rows)
    return EXIT_OK


def _cmd_verify(argv) -> int:
    ap = argparse.ArgumentParser(prog="renyi-lab verify")
    ap.add_argument("suite", choices=sorted(SUITES) + ["all"])
    ap.add_argument("--fast", action="store_true", help="reduced grids for a quick look")
    ap.add_argument("-o", "--output")
    args = ap.parse_args(argv)
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    all_ok = True
    out_rows = []
    for name in names:
        res = run_suite(name, fast=args.fast)
        all_ok &= res.passed
        print(f"[{'PASS' if res.passed else 'FAIL'}] {name}: {res.summary}")
        for r in res.rows:
            out_rows.append([name] + [report.format_value(v) for v in r])
        if args.suite != "all" and res.rows:
            report.write_csv(sys.stdout, ("suite",) + res.header, out_rows)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write("suite,detail\n")
            for r in out_rows:
                fh.write(",".join(str(v) for v in r) + "\n")
    return EXIT_OK if all_ok else 1


_COMMANDS = {
    "resolvability": _cmd_resolvability,
    "oneshot": _cmd_oneshot,
    "exponent": _cmd_exponent,
    "simulate": _cmd_simulate,
    "stability": _cmd_stability,
    "anticontractivity": _cmd_anticontractivity,
    "binary": _cmd_binary,
    "verify": _cmd_verify,
}


def run(argv) -> int:
    """Dispatch a renyi-lab invocation; returns the process exit code."""
    if not argv or argv[0] in ("-h", "--help"):
        print("usage: renyi-lab <subcommand> [options]\nsubcommands: "
              + ", ".join(sorted(_COMMANDS)))
        return EXIT_OK if argv else EXIT_USAGE
    cmd, rest = argv[0], argv[1:]
    if cmd not in _COMMANDS:
        print(f"unknown subcommand {cmd!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[cmd](rest)
    except GuardExceededError as e:
        print(f"guard exceeded: {e}", file=sys.stderr)
        return EXIT_GUARD
    except (_CliError, ValueError, KeyError, ZeroDivisionError) as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
