"""Command line entry point.

Subcommands: kernel-build, kernel-verify, rate, family-build,
family-verify, risk-run.  Exit codes: 0 success, 1 verification failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .kernels import build_order_kernel, kernel_from_json, kernel_to_json, verify_order
from .lower_bound import (FamilyParams, InfeasibleParameters, build_family,
                          choose_parameters, family_report_json, family_report)
from .product import (product_kernel_from_json, product_kernel_to_json,
                      tensor_kernel, verify_class)
from .risk import config_from_dict, mc_risk, rate_exponent, report_summary, report_to_csv

USAGE_ERROR = 2
VERIFY_FAIL = 1


def _split_pair(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated integers, got {text!r}")
    return int(parts[0]), int(parts[1])


def _write_or_print(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixedkde")
    sub = parser.add_subparsers(dest="command", required=True)

    pk = sub.add_parser("kernel-build", help="build a univariate or product kernel")
    pk.add_argument("--order", type=int, help="univariate kernel order")
    pk.add_argument("--s", type=_split_pair, help="product kernel orders s1,s2")
    pk.add_argument("--d", type=_split_pair, help="product kernel dimensions d1,d2")
    pk.add_argument("--strict", action="store_true")
    pk.add_argument("--out")

    pv = sub.add_parser("kernel-verify", help="verify a kernel JSON file")
    pv.add_argument("--config", required=True, help="kernel JSON path")
    pv.add_argument("--order", type=int, help="claimed order for univariate kernels")
    pv.add_argument("--tol", type=float, default=1e-8)
    pv.add_argument("--out")

    pr = sub.add_parser("rate", help="print an exact rate exponent")
    pr.add_argument("--s", type=_split_pair, required=True)
    pr.add_argument("--d", type=_split_pair, required=True)
    pr.add_argument("--p", type=float, default=2.0)
    pr.add_argument("--regime", default="mixed-upper")

    fb = sub.add_parser("family-build", help="build the lower-bound family")
    fb.add_argument("--s", type=_split_pair, required=True)
    fb.add_argument("--d", type=_split_pair, required=True)
    fb.add_argument("--p", type=float, required=True)
    fb.add_argument("--r", type=float, required=True)
    fb.add_argument("--n", type=int, required=True, help="sample size the parameters target")
    fb.add_argument("--noncompact", action="store_true")
    fb.add_argument("--big-n", type=float, default=10.0, help="plateau width constant (compact regime)")
    fb.add_argument("--seed", type=int, default=0)
    fb.add_argument("--out")

    fv = sub.add_parser("family-verify", help="rebuild a family from a report and re-check it")
    fv.add_argument("--config", required=True, help="family JSON path")
    fv.add_argument("--tol", type=float, default=1e-6)
    fv.add_argument("--seed", type=int, default=0)
    fv.add_argument("--out")

    rr = sub.add_parser("risk-run", help="run a Monte Carlo risk experiment")
    rr.add_argument("--config", required=True, help="experiment JSON path")
    rr.add_argument("--out", required=True, help="output prefix (.csv and .json written)")
    rr.add_argument("--threads", type=int, default=1)
    rr.add_argument("--replicates", type=int, help="override the config replicate count")
    rr.add_argument("--seed", type=int, help="override the config master seed")

    return parser


def _cmd_kernel_build(args) -> int:
    if args.s is not None:
        if args.d is None:
            print("kernel-build: --s requires --d", file=sys.stderr)
            return USAGE_ERROR
        s1, s2 = args.s
        d1, d2 = args.d
        kernel = tensor_kernel(build_order_kernel(s1, args.strict), d1,
                               build_order_kernel(s2, args.strict), d2, s1, s2)
        _write_or_print(product_kernel_to_json(kernel), args.out)
        return 0
    if args.order is None:
        print("kernel-build: need --order or --s/--d", file=sys.stderr)
        return USAGE_ERROR
    kernel = build_order_kernel(args.order, args.strict)
    _write_or_print(kernel_to_json(kernel), args.out)
    return 0


def _cmd_kernel_verify(args) -> int:
    text = Path(args.config).read_text()
    doc = json.loads(text)
    if "kappa1" in doc:
        kernel = product_kernel_from_json(text)
        report = verify_class(kernel, tol=args.tol)
        payload = {
            "markov_defect": report.markov_defect,
            "worst_moment": report.worst_moment,
            "I_s1_s2": report.i_s1_s2,
            "sup_norm": report.sup_norm,
            "pass": report.passed,
        }
        passed = report.passed
    else:
        kernel = kernel_from_json(text)
        order = args.order if args.order is not None else kernel.order
        report = verify_order(kernel, order, args.tol)
        payload = {
            "order": order,
            "worst_violation": report.worst_violation,
            "absolute_moment_s": report.absolute_moment_s,
            "sup_norm": report.sup_norm,
            "pass": report.passed,
        }
        passed = report.passed
    _write_or_print(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0 if passed else VERIFY_FAIL


def _cmd_rate(args) -> int:
    frac = rate_exponent(list(args.s), list(args.d), args.p, args.regime)
    print(f"{frac.numerator}/{frac.denominator} = {float(frac):.15g}")
    return 0


def _family_from_args(args):
    s1, s2 = args.s
    d1, d2 = args.d
    params = choose_parameters(args.n, args.r, args.p, s1, s2, d1, d2,
                               compact_regime=not args.noncompact,
                               big_n=args.big_n)
    return build_family(params, code_seed=args.seed)


def _cmd_family_build(args) -> int:
    fam = _family_from_args(args)
    _write_or_print(family_report_json(fam), args.out)
    return 0


def _cmd_family_verify(args) -> int:
    doc = json.loads(Path(args.config).read_text())
    p = doc["params"]
    params = FamilyParams(s1=p["s1"], s2=p["s2"], d1=p["d1"], d2=p["d2"],
                          p=p["p"], r=p["r"], big_n=p["N"], kappa=p["kappa"],
                          sigma=p["sigma"], amplitude=p["A"], m_per_axis=p["M"],
                          epsilon=p["epsilon"], r_star=p["r_star"],
                          compact_regime=p["compact_regime"])
    fam = build_family(params, code_seed=args.seed)
    report = family_report(fam)
    report["pass"] = bool(
        report["distance_identity_rel_error"] <= args.tol
        and report["affinity_identity_rel_error"] <= args.tol
        and report["worst_pdf_defect"] <= 1e-8
        and report["worst_negative_value"] >= -1e-12
        and report["code_size"] >= report["code_size_bound"]
        and report["min_hamming_distance"] >= report["min_hamming_bound"]
    )
    _write_or_print(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    return 0 if report["pass"] else VERIFY_FAIL


def _cmd_risk_run(args) -> int:
    doc = json.loads(Path(args.config).read_text())
    if args.replicates is not None:
        doc["replicates"] = args.replicates
    if args.seed is not None:
        doc["master_seed"] = args.seed
    report = mc_risk(doc, workers=max(1, args.threads))
    summary = report_summary(report, slope_tol=float(doc.get("slope_tol", 0.15)))
    out = Path(args.out)
    out.with_suffix(".csv").write_text(report_to_csv(report))
    out.with_suffix(".json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"fitted slope {summary['fitted_slope']:+.4f} "
          f"(theory {-summary['theoretical_exponent']:+.4f}), "
          f"pass={summary['pass']}")
    return 0 if summary["pass"] else VERIFY_FAIL


_COMMANDS = {
    "kernel-build": _cmd_kernel_build,
    "kernel-verify": _cmd_kernel_verify,
    "rate": _cmd_rate,
    "family-build": _cmd_family_build,
    "family-verify": _cmd_family_verify,
    "risk-run": _cmd_risk_run,
}


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, InfeasibleParameters) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
