"""Command-line entry point.

Settings come from three layers, later ones winning: the figure defaults,
an optional ``--config`` file of flat ``key = value`` lines, and explicit
flags.  Config keys are the long flag names with or without dashes
(``n-grid`` or ``n_grid``); list values are comma separated.

Exit codes: 0 success, 2 invalid parameters, 3 I/O failure, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys

from .errors import DomainError, InvariantViolation
from .experiments import CUSTOM_ESTIMATORS, Figure, default_spec, run

log = logging.getLogger("spacemimo")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_INVARIANT = 4

_KEYS = ("figure", "n_grid", "d0_grid", "users", "rho_db", "loss_db", "trials", "seed",
         "workers", "out", "svg", "reference", "epsilon_terms", "estimators")


class _UsageError(Exception):
    pass


def _int_list(text):
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def _float_list(text):
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _str_list(text):
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_CONVERT = {
    "figure": str,
    "n_grid": _int_list,
    "d0_grid": _float_list,
    "users": _int_list,
    "rho_db": _float_list,
    "loss_db": float,
    "trials": int,
    "seed": int,
    "workers": int,
    "out": str,
    "svg": str,
    "reference": _bool,
    "epsilon_terms": int,
    "estimators": _str_list,
}


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file into typed settings."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    with open(path) as fh:
        parser.read_string("[spacemimo]\n" + fh.read(), source=str(path))
    out = {}
    for raw, value in parser["spacemimo"].items():
        key = raw.replace("-", "_")
        if key not in _CONVERT:
            raise _UsageError(f"unknown config key {raw!r}")
        try:
            out[key] = _CONVERT[key](value)
        except ValueError as exc:
            raise _UsageError(f"bad value for {raw!r}: {exc}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="spacemimo",
        description="Reproduce the inner-product moment and MRT sum-rate figures "
                    "for space-constrained ULAs, or run custom sweeps.")
    p.add_argument("--config", help="flat key = value file mirroring the flags")
    p.add_argument("--figure", choices=[f.value for f in Figure])
    p.add_argument("--n-grid", type=_int_list, help="antenna counts, e.g. 64,128,256")
    p.add_argument("--d0-grid", type=_float_list, help="apertures in wavelengths, e.g. 4,10")
    p.add_argument("--reference", action=argparse.BooleanOptionalAction, default=None,
                   help="include the half-wavelength reference array (default on)")
    p.add_argument("--users", type=_int_list, help="user count K (list for custom sweeps)")
    p.add_argument("--rho-db", type=_float_list, help="transmit SNR in dB")
    p.add_argument("--loss-db", type=float, help="propagation and shadowing loss in dB")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per grid point")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="worker threads; output does not depend on it")
    p.add_argument("--epsilon-terms", type=int,
                   help="truncation of the correction series (default N-1)")
    p.add_argument("--estimators", type=_str_list,
                   help="custom sweeps only; any of " + ",".join(CUSTOM_ESTIMATORS))
    p.add_argument("--out", help="CSV path, '-' for stdout (default)")
    p.add_argument("--svg", help="also render the rows to this SVG path (needs matplotlib)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_settings(args) -> dict:
    settings = {}
    if args.config:
        settings.update(read_config(args.config))
    for key in _KEYS:
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    return settings


def spec_from_settings(settings):
    figure = settings.get("figure", "fig1")
    overrides = {k: v for k, v in settings.items() if k not in ("figure", "out", "svg")}
    return default_spec(figure, **overrides)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        settings = resolve_settings(args)
        spec = spec_from_settings(settings)
    except OSError as exc:
        print(f"spacemimo: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (_UsageError, DomainError, ValueError, TypeError) as exc:
        print(f"spacemimo: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID

    log.info("running %s over N=%s d0=%s (%d trials, seed %d)", spec.figure.value,
             spec.n_grid, spec.d0_grid, spec.trials, spec.seed)
    try:
        result = run(spec)
    except DomainError as exc:
        print(f"spacemimo: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InvariantViolation as exc:
        print(f"spacemimo: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    out = settings.get("out", "-")
    try:
        if out == "-":
            sys.stdout.write(result.to_csv())
        else:
            result.write_csv(out)
        if settings.get("svg"):
            result.write_svg(settings["svg"])
    except ImportError:
        print("spacemimo: --svg needs matplotlib (pip install 'artifact[plot]')",
              file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"spacemimo: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
