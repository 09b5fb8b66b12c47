"""Command line entry point: ``kcq <command> [options]``.

Exit status is 0 when every gated report row passes, 1 when any fails and 2
for configuration or usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments as ex
from . import metrics as mt
from . import qk, qumode
from .report import (CPPM_SWEEP_COLUMNS, all_passed, emit_report, phase_distribution_csv,
                     table_csv, trial_records_csv)

DEFAULTS = {
    "qk": {"protocol": "qk", "quantity": "advantage", "params": {"n": 1000}, "trials": 10000},
    "alphaEta": {"protocol": "alphaEta", "quantity": "bobBer", "trials": 100000},
    "cppm": {"protocol": "cppm", "quantity": "bobError", "trials": 100000},
}


def _common(p: argparse.ArgumentParser, config: bool = True):
    if config:
        p.add_argument("--config", type=Path, help="experiment config (JSON)")
    p.add_argument("--seed", type=int, help="override rngSeed (unsigned 64-bit)")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="report format (default csv)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kcq", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qk", help="qubit keyed scheme")
    _common(p)
    p.add_argument("--records", type=Path, help="also write per-trial records CSV")

    p = sub.add_parser("alpha-eta", help="coherent-state keyed phase scheme")
    _common(p)
    p.add_argument("--phase-density", type=float, metavar="ALPHA",
                   help="write the canonical phase density of |ALPHA> as CSV instead")
    p.add_argument("--grid", type=int, default=1024, help="phase grid size")

    p = sub.add_parser("cppm", help="keyed pulse position modulation")
    _common(p)
    p.add_argument("--table", type=Path, help="also write the block-error sweep table CSV")

    p = sub.add_parser("metrics", help="key-security calculators (JSON output)")
    _common(p)
    ops = p.add_subparsers(dest="op")
    o = ops.add_parser("trial-complexity")
    o.add_argument("probs", type=float, nargs="+")
    o = ops.add_parser("solve-p1")
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--info", type=float, required=True)
    o = ops.add_parser("fano")
    o.add_argument("--info", type=float, required=True)
    o.add_argument("--n", type=float, required=True)
    o = ops.add_parser("profile-bounds")
    o.add_argument("--l", type=int, required=True)
    o.add_argument("--n", type=int, required=True)
    o = ops.add_parser("information")
    src = o.add_mutually_exclusive_group(required=True)
    src.add_argument("--joint", type=Path, help="JSON nested list of shape |X| x |Y| x |K|")
    src.add_argument("--xor-bits", type=int, help="uniform one-time pad on this many bits")
    o.add_argument("--query", choices=mt.QUERIES, action="append")
    o = ops.add_parser("efficiency")
    for name in ("R", "Km", "info", "Kv"):
        o.add_argument(f"--{name}", type=float, required=True)
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--m", type=int, required=True)
    o.add_argument("--key-reused", action="store_true")
    o = ops.add_parser("splitting")
    o.add_argument("--pB", type=float, required=True)
    o.add_argument("--pE", type=float, required=True)
    o = ops.add_parser("rate-window")
    o.add_argument("--I-BE", dest="I_BE", type=float, required=True)
    o.add_argument("--I-AB", dest="I_AB", type=float, required=True)
    o.add_argument("--R", type=float, required=True)
    o.add_argument("--key-bits", type=float, required=True)
    o.add_argument("--n", type=int, required=True)

    p = sub.add_parser("verify-all", help="run every bundled acceptance experiment")
    _common(p, config=False)
    p.add_argument("--only", action="append", default=[],
                   help="run configs whose name contains this text (repeatable)")
    return ap


def _write(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _load(args, protocol: str) -> ex.ExperimentConfig:
    if args.config is None:
        return ex.parse_config(DEFAULTS[protocol])
    cfg = ex.load_config(args.config)
    if cfg.protocol != protocol:
        raise ex.ConfigError("protocol", f"expected {protocol!r}, got {cfg.protocol!r}")
    return cfg


def _run(cfg: ex.ExperimentConfig, args) -> int:
    rows = ex.run_experiment(cfg, jobs=args.jobs, seed=args.seed)
    out = args.out or (Path(cfg.output_path) if cfg.output_path else None)
    text = emit_report(rows, args.format or cfg.format, out)
    if out is None:
        sys.stdout.write(text)
    table = getattr(args, "table", None)
    if table is not None:
        pts = [{"m": r.params["m"], "S": r.params["S"], "eta": r.params["eta"],
                "receiver": r.params["receiver"], "blockError": r.estimate, "stdErr": r.stderr}
               for r in rows if r.quantity in ("bobBlockError", "eveBlockError",
                                               "eveBlockErrorKeyExcluded")]
        table.write_text(table_csv(CPPM_SWEEP_COLUMNS, pts))
    return 0 if all_passed(rows) else 1


def cmd_qk(args) -> int:
    cfg = _load(args, "qk")
    if args.records is not None:
        p = cfg.points()[0]
        if "channelNoise" not in p:
            raise ex.ConfigError("quantity", "--records needs a protocol-run quantity")
        qcfg = ex._qk_config(p, cfg.rng_seed if args.seed is None else args.seed)
        recs = qk.run_qk_trials(qcfg, min(cfg.trials, 10_000), args.jobs)
        args.records.write_text(trial_records_csv(recs))
    return _run(cfg, args)


def cmd_alpha_eta(args) -> int:
    if args.phase_density is not None:
        a = args.phase_density
        dist = qumode.phase_pom_distribution(a, qumode.cutoff_rule(a * a), args.grid)
        _write(phase_distribution_csv(dist), args.out)
        return 0
    return _run(_load(args, "alphaEta"), args)


def cmd_cppm(args) -> int:
    return _run(_load(args, "cppm"), args)


def _metrics_op(args) -> dict:
    op = args.op
    if op == "trial-complexity":
        prof = mt.ErrorProfile(args.probs)
        return {"trialComplexity": mt.trial_complexity(prof)}
    if op == "solve-p1":
        return {"n": args.n, "info": args.info, "p1": mt.solve_p1_given_info(args.n, args.info)}
    if op == "fano":
        return {"info": args.info, "n": args.n, "bitErrorLowerBound": mt.fano_bound(args.info, args.n)}
    if op == "profile-bounds":
        b = mt.profile_bounds(args.l, args.n)
        return {"l": args.l, "n": args.n, "maxInfo": b.max_info,
                "minTrialComplexity": b.min_trial_complexity,
                "extremalSupport": int(b.extremal_profile.probs.size)}
    if op == "information":
        if args.joint is not None:
            joint = mt.DiscreteJoint(json.loads(args.joint.read_text()))
        else:
            joint = mt.xor_cipher_joint(args.xor_bits)
        return {q: mt.discrete_information(joint, q) for q in (args.query or mt.QUERIES)}
    if op == "efficiency":
        return {"efficiency": mt.keygen_efficiency(args.R, args.Km, args.n, args.info, args.Kv,
                                                   args.m, args.key_reused)}
    if op == "splitting":
        return {"cheatProbability": mt.splitting_cheat_probability(args.pB, args.pE)}
    if op == "rate-window":
        return mt.rate_window_check(args.I_BE, args.I_AB, args.R, args.key_bits, args.n).to_json()
    raise ValueError(f"unknown metrics operation {op!r}")


def cmd_metrics(args) -> int:
    if args.op is None:
        return _run(_load_metrics(args), args)
    _write(json.dumps(_metrics_op(args), indent=2) + "\n", args.out)
    return 0


def _load_metrics(args) -> ex.ExperimentConfig:
    if args.config is None:
        raise ex.ConfigError("", "metrics needs --config or an operation")
    return _load(args, "metrics")


def cmd_verify_all(args) -> int:
    rows = []
    for path in ex.bundled_configs():
        if args.only and not any(s in path.stem for s in args.only):
            continue
        cfg = ex.load_config(path)
        part = ex.run_experiment(cfg, jobs=args.jobs, seed=args.seed)
        ok = all_passed(part)
        print(f"{'PASS' if ok else 'FAIL'} {cfg.name}", file=sys.stderr)
        rows.extend(part)
    if not rows:
        raise ex.ConfigError("--only", "no bundled config matched")
    _write(emit_report(rows, args.format or "csv"), args.out)
    return 0 if all_passed(rows) else 1


COMMANDS = {"qk": cmd_qk, "alpha-eta": cmd_alpha_eta, "cppm": cmd_cppm,
            "metrics": cmd_metrics, "verify-all": cmd_verify_all}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("kcq: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except (ex.ConfigError, ValueError) as exc:
        print(f"kcq: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
