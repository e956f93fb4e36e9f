"""Command-line front end.

    b92sim run        simulate one link and distill a key
    b92sim sweep      run a preset or custom parameter sweep, write CSV
    b92sim calibrate  fit free parameters to anchor error rates
    b92sim version    print the package version

Exit status: 0 on success, 1 for usage or configuration errors (bad flags,
unreadable files, invalid values), 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .analytics import analytic_rates
from .calibrate import DEFAULT_ANCHORS, calibrate, verify_calibration
from .config import (
    LinkConfig,
    config_to_mapping,
    default_config,
    load_config,
    render_config,
)
from .detector import get_profile
from .postproc import distill
from .protocol import run_link
from .sweep import emit_results, load_sweep, preset_fig2, preset_fig3, run_sweep


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="b92sim",
        description="simulate a clocked two-state polarization QKD link",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one link and distill a key")
    p_run.add_argument("--config", metavar="TOML", help="link description")
    p_run.add_argument("--profile", help="detector profile override")
    p_run.add_argument("--mode", choices=("fiber", "attenuator"),
                       help="channel mode override")
    p_run.add_argument("--seed", type=int, default=1)
    p_run.add_argument("--slots", type=int, default=2_000_000,
                       help="clock periods to simulate")
    p_run.add_argument("--out", metavar="JSON",
                       help="also write a machine-readable report")

    p_sweep = sub.add_parser("sweep", help="sweep clock frequency or length")
    grid = p_sweep.add_mutually_exclusive_group(required=True)
    grid.add_argument("--preset", choices=("fig2", "fig3"))
    grid.add_argument("--config", metavar="TOML",
                      help="custom sweep description")
    p_sweep.add_argument("--out", default="results", metavar="DIR")
    p_sweep.add_argument("--seed", type=int, default=None,
                         help="override the sweep's base seed")
    p_sweep.add_argument("--workers", type=int, default=1)

    p_cal = sub.add_parser("calibrate",
                           help="fit free parameters to anchor error rates")
    p_cal.add_argument("--config", metavar="TOML", help="starting link")
    p_cal.add_argument("--out", metavar="TOML",
                       help="write the fitted configuration here")
    p_cal.add_argument("--slots", type=int, default=2_000_000,
                       help="periods per verification run (0 skips it)")
    p_cal.add_argument("--seed", type=int, default=7)

    sub.add_parser("version", help="print the package version")
    return parser


def _load_base(args) -> LinkConfig:
    config = load_config(args.config) if args.config else default_config()
    if getattr(args, "profile", None):
        config = config.replace(detector=get_profile(args.profile))
    if getattr(args, "mode", None):
        channel = dataclasses.replace(config.channel, mode=args.mode)
        config = config.replace(channel=channel)
    return config


def _cmd_run(args) -> int:
    config = _load_base(args)
    print("# resolved configuration")
    print(render_config(config))

    pred = analytic_rates(config)
    print("# prediction")
    print(f"qber               {pred.qber:.5f}")
    print(f"sift_rate_bps      {pred.sift_rate_bps:.1f}")
    print(f"net_rate_bps       {pred.net_rate_bps:.1f}")
    print(f"detected_rate_cps  {pred.detected_rate_cps:.1f}")
    print(f"timing_fwhm_ps     {pred.budget.total_fwhm_ps:.1f}")
    print()

    summary, key, _ = run_link(config, args.slots, args.seed)
    print(f"# simulation ({args.slots} periods, seed {args.seed})")
    print(f"detected_rate_cps  {summary.detected_rate_cps:.1f}")
    print(f"sifted_bits        {summary.sifted_bits}")
    print(f"double_clicks      {summary.double_clicks}")
    print(f"qber               {summary.qber:.5f}"
          f" +/- {summary.statistical_error_qber:.5f}")
    print(f"sift_rate_bps      {summary.sift_rate_bps:.1f}")
    print(f"net_rate_bps       {summary.net_rate_bps:.1f}")

    report = {
        "config": config_to_mapping(config),
        "seed": args.seed,
        "n_slots": args.slots,
        "detected_rate_cps": summary.detected_rate_cps,
        "sifted_bits": summary.sifted_bits,
        "double_clicks": summary.double_clicks,
        "qber": summary.qber,
        "statistical_error_qber": summary.statistical_error_qber,
        "sift_rate_bps": summary.sift_rate_bps,
        "net_rate_bps": summary.net_rate_bps,
        "prediction": {
            "qber": pred.qber,
            "sift_rate_bps": pred.sift_rate_bps,
            "net_rate_bps": pred.net_rate_bps,
            "detected_rate_cps": pred.detected_rate_cps,
        },
    }

    if summary.sifted_bits > 0:
        result = distill(key.alice_bits, key.bob_bits,
                         config.security, seed=args.seed)
        print()
        print("# distilled key")
        print(f"final_bits         {result.final_length}")
        print(f"parity_bits_leaked {result.reconciliation.parity_bits_leaked}")
        print(f"identical          {result.identical}")
        if result.final_length:
            print(f"alice              {result.alice_hex()}")
            print(f"bob                {result.bob_hex()}")
        report["key"] = {
            "final_bits": result.final_length,
            "parity_bits_leaked": result.reconciliation.parity_bits_leaked,
            "identical": result.identical,
            "alice_hex": result.alice_hex(),
            "bob_hex": result.bob_hex(),
        }

    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
        print(f"\nwrote {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    if args.preset == "fig2":
        spec = preset_fig2()
    elif args.preset == "fig3":
        spec = preset_fig3()
    else:
        spec = load_sweep(args.config)
    if args.seed is not None:
        spec = dataclasses.replace(spec, base_seed=args.seed)
    rows = run_sweep(spec, workers=args.workers)
    csv_path, gp_path = emit_results(rows, spec, args.out)
    for row in rows:
        print(f"{row.axis_value:>12g}  {row.profile:>8s}  {row.channel_mode:>10s}"
              f"  qber {row.qber:.4f}  net {row.net_rate_bps:>12.1f} bit/s")
    print(f"\nwrote {csv_path} and {gp_path}")
    return 0


def _cmd_calibrate(args) -> int:
    base = load_config(args.config) if args.config else default_config()
    result = calibrate(base)
    print(f"# calibration ({result.rounds} rounds, "
          f"objective {result.objective:.3e})")
    for name, value in result.params.items():
        print(f"{name:<22s} {value:g}")
    print()
    for report in result.anchors:
        flag = "ok" if report.within_tolerance else "MISSED"
        print(f"anchor {report.profile:<10s} target {report.target_qber:.4f}"
              f"  model {report.model_qber:.4f}  [{flag}]")
    if args.slots > 0:
        print()
        for row in verify_calibration(result, DEFAULT_ANCHORS,
                                      n_slots=args.slots, seed=args.seed):
            print(f"simulated {row.profile:<10s} qber {row.simulated_qber:.4f}"
                  f" +/- {row.sigma:.4f} ({row.sifted_bits} bits)")
    if args.out:
        Path(args.out).write_text(render_config(result.config))
        print(f"\nwrote {args.out}")
    return 0 if result.converged else 2


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors; fold to 1
        return 0 if not exc.code else 1

    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "calibrate":
            return _cmd_calibrate(args)
        if args.command == "version":
            print(f"b92sim {__version__}")
            return 0
        raise AssertionError(f"unhandled command {args.command!r}")
    except (ValueError, OSError) as exc:  # bad values or unreadable files
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001  anything else is a runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
