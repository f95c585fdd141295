"""Command line entry point.

Exit status: 0 when every hard check passes, 1 when a hard check fails,
2 for invalid invocations or configurations (nothing is written then).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from .suites import SUITES, SuiteAbort, SuiteConfig, SuiteResult, run_suite

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON file with seed, trials, tol, threads and per-suite params")
    parser.add_argument("--seed", type=int, help="root seed (default 0)")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials or sweep size per task")
    parser.add_argument("--tol", type=float, help="absolute tolerance for inequality slack")
    parser.add_argument("--out", type=Path, default=Path("hyperzr-out"), help="output directory")
    parser.add_argument("--threads", type=int, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperzr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run verification suites")
    verify.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    _common(verify)

    hh = sub.add_parser("hh-sim", help="hidden hypermatching checks, or protocols on a serialized instance")
    hh.add_argument("--instance", type=Path, help="HH instance JSON to run both protocols on")
    hh.add_argument("--budget", type=int, help="classical protocol budget (default n)")
    hh.add_argument("--repetitions", type=int, default=1)
    _common(hh)

    stream = sub.add_parser("ug-stream", help="streaming checks, or run one algorithm over a JSON-lines stream")
    stream.add_argument("--stream", type=Path, help="JSON-lines constraint stream")
    stream.add_argument("--alg", default="counter", help="streaming algorithm name")
    stream.add_argument("-r", type=int)
    stream.add_argument("-n", type=int)
    stream.add_argument("-t", type=int)
    _common(stream)

    lab = sub.add_parser("ldc-lab", help="code checks, or smoothness and certificates for a serialized code")
    lab.add_argument("--code", type=Path, help="code/decoder JSON")
    lab.add_argument("--delta", type=float, default=0.1)
    _common(lab)
    return parser


def load_config(args: argparse.Namespace, suite: str) -> SuiteConfig:
    data: dict[str, Any] = {}
    if args.config is not None:
        data = json.loads(args.config.read_text())
    overrides = {"seed": args.seed, "trials": args.trials, "tol": args.tol, "threads": args.threads}
    merged = {**data, **{k: v for k, v in overrides.items() if v is not None}}
    allowed = {"seed", "trials", "tol", "threads", "params"}
    unknown = set(merged) - allowed - {"suite"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return SuiteConfig(suite=suite, **{k: merged[k] for k in allowed if k in merged})


def write_reports(result: SuiteResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{result.suite}_summary.json").write_text(json.dumps(result.summary(), indent=2, sort_keys=True) + "\n")
    (out / f"{result.suite}_detail.csv").write_text(result.csv_text())


def _print_rows(result: SuiteResult) -> None:
    for row in result.rows:
        status = "PASS" if row.passed else ("WARN" if row.kind == "statistical" else "FAIL")
        print(f"{status} {row.suite}/{row.anchor} {json.dumps(row.params, sort_keys=True)} slack={row.slack:.3e}")


def _run_and_report(args: argparse.Namespace, suite: str) -> int:
    result = run_suite(load_config(args, suite))
    write_reports(result, args.out)
    _print_rows(result)
    return EXIT_FAILED if result.hard_failures else EXIT_OK


def _hh_instance(args: argparse.Namespace) -> int:
    from .hidden_matching import HHInstance, classical_protocol_run, quantum_acceptance_probability, quantum_protocol_run

    inst = HHInstance.from_json(args.instance.read_text())
    seed = args.seed or 0
    report = {
        "label": inst.label,
        "classical": classical_protocol_run(inst, inst.M.n if args.budget is None else args.budget, [seed, 0]),
    }
    if inst.M.t == 2:
        report["quantum"] = quantum_protocol_run(inst, args.repetitions, [seed, 1])
        report["quantum_accept_probability"] = quantum_acceptance_probability(inst)
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def _ug_stream(args: argparse.Namespace) -> int:
    from .streaming import UGInstance, make_algorithm

    if None in (args.r, args.n, args.t):
        raise ValueError("-r, -n and -t are required with --stream")
    inst = UGInstance.from_jsonl(args.stream.read_text(), args.r, args.n, args.t)
    alg = make_algorithm(args.alg)
    state = alg.run(inst.r, inst.n, inst.t, inst.constraints)
    print(json.dumps({"algorithm": args.alg, "constraints": len(inst), "output": alg.output(state)}, sort_keys=True))
    return EXIT_OK


def _ldc_code(args: argparse.Namespace) -> int:
    from . import ldc

    code, decoder = ldc.code_from_json(args.code.read_text())
    report = ldc.smoothness_report(code, decoder)
    certificates = []
    for i in range(code.n):
        res = ldc.good_set_matching(code, decoder, i)
        certificates.append(
            {
                "i": i,
                "epsilon": res.epsilon,
                "threshold": res.threshold,
                "matching": [{"Q": list(g.Q), "correlation": g.correlation, "fourier_mass": g.fourier_mass} for g in res.matching],
            }
        )
    q, delta, eps = report.as_ldc(args.delta)
    print(
        json.dumps(
            {
                "smoothness": {"q": report.q, "c": report.c, "epsilon": report.epsilon, "max_query_prob": report.max_query_prob},
                "as_ldc": {"q": q, "delta": delta, "epsilon": eps},
                "certificates": certificates,
            },
            sort_keys=True,
        )
    )
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return _run_and_report(args, args.suite)
        if args.command == "hh-sim":
            return _hh_instance(args) if args.instance else _run_and_report(args, "hh")
        if args.command == "ug-stream":
            return _ug_stream(args) if args.stream else _run_and_report(args, "ug")
        if args.command == "ldc-lab":
            return _ldc_code(args) if args.code else _run_and_report(args, "ldc")
    except SuiteAbort as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser.error(f"unknown command {args.command}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
