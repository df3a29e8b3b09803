"""Command line: ``fragcorr {trajectory,verify,sweep,regimes}``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 verification failure. Thread count comes from ``FRAGCORR_THREADS``.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import RunConfig
from .errors import ConfigError, NumericalError, ParameterDomainError, PreconditionError
from .runs import THREADS_ENV, regime_lines, run_sweep, run_trajectory, run_verify

log = logging.getLogger("fragcorr")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3

# flag -> (config field, type, help)
_OVERRIDES = {
    "--m": ("m", float, "fragment mass (default 1)"),
    "--hbar": ("hbar", float, "reduced Planck constant (default 1)"),
    "--kappa": ("kappa", float, "coupling strength (default 1 when --omega is absent)"),
    "--omega": ("omega", float, "oscillation frequency sqrt(8 kappa / M), instead of --kappa"),
    "--a": ("a", float, "initial center-of-mass width (default 1)"),
    "--delta-p": ("delta_p", float, "initial total-momentum spread hbar/a, instead of --a"),
    "--p0": ("p0", float, "mean momentum of each fragment (default 1)"),
    "--volume": ("volume", float, "reference volume for the Schmidt number (default 1)"),
    "--t-max": ("t_max", float, "last sample time (default 10)"),
    "--samples": ("samples", int, "number of sample times, >= 2 (default 101)"),
    "--n": ("n", int, "propagation grid points, power of two >= 256 (default: automatic, >= 4096)"),
    "--extent": ("extent", float, "propagation grid half-width (default: 20 widest Gaussian widths)"),
    "--dt": ("dt", float, "propagation time step (default 2.5e-4 min(pi/omega, M a^2/hbar))"),
    "--box-L": ("box_L", float, "purity box half-width (default 40)"),
    "--box-n": ("box_n", int, "purity grid points per axis (default 1024)"),
    "--format": ("format", str, "output format: csv or json (default csv)"),
    "--output": ("path", str, "output file (default: stdout)"),
}


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _tolerance(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("expected NAME=VALUE")
    try:
        return name.strip(), float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its keys")
    for flag, (dest, typ, help_) in _OVERRIDES.items():
        common.add_argument(flag, dest=dest, type=typ, default=None, help=help_)
    common.add_argument("--kappas", type=_float_list, default=None, help="comma-separated kappa sweep axis")
    common.add_argument("--a-values", dest="a_values", type=_float_list, default=None,
                        help="comma-separated width sweep axis")
    common.add_argument("--tol", action="append", type=_tolerance, default=[], metavar="NAME=VALUE",
                        help="override a verification tolerance")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="fragcorr",
        description="Correlations of two decay fragments coupled by kappa (x+y)^2.",
        epilog=f"Set {THREADS_ENV} to bound worker threads.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("trajectory", parents=[common], help="time series of widths, correlations and entanglement")
    sub.add_parser("verify", parents=[common], help="check closed forms against numerical oracles")
    sub.add_parser("sweep", parents=[common], help="regime map over kappa and width axes")
    sub.add_parser("regimes", parents=[common], help="print regime classification only")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    for dest, _, _ in _OVERRIDES.values():
        value = getattr(args, dest)
        if value is not None:
            setattr(cfg, dest, value)
    # An override of one member of a mutually exclusive pair drops the other.
    if args.omega is not None and args.kappa is None:
        cfg.kappa = None
    if args.kappa is not None and args.omega is None:
        cfg.omega = None
    if args.delta_p is not None and args.a is None:
        cfg.a = None
    if args.a is not None and args.delta_p is None:
        cfg.delta_p = None
    if args.kappas is not None:
        cfg.kappas = args.kappas
    if args.a_values is not None:
        cfg.a_values = args.a_values
    if args.tol:
        cfg.tolerances = {**cfg.tolerances, **dict(args.tol)}
    return cfg.validate()


def _emit(report, cfg: RunConfig) -> None:
    text = report.write()
    if not cfg.path:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if args.command == "trajectory":
            _emit(run_trajectory(cfg), cfg)
        elif args.command == "sweep":
            _emit(run_sweep(cfg), cfg)
        elif args.command == "regimes":
            print("\n".join(regime_lines(cfg)))
        else:
            result = run_verify(cfg)
            for line in result.lines():
                print(line)
            if cfg.path:
                result.report().write()
            if not result.passed:
                return EXIT_VERIFY
    except (ConfigError, ParameterDomainError, PreconditionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
