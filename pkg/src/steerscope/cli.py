"""Command-line front end.

Exit codes: 0 ok, 1 I/O or parse error, 2 invalid state, 3 steerable
(``analyze`` only), 4 monogamy bound exceeded (``monogamy`` only).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from contextlib import contextmanager

from . import __version__
from .monogamy import (
    BOUND,
    VIOLATION_TOL,
    monogamy_check,
    monogamy_scan,
    state_digest,
)
from .optimizer import OptimizationSettings, maximize_cffw_numeric
from .states import (
    ENSEMBLE_KINDS,
    STATE_TOL,
    EnsembleSpec,
    StateValidationError,
    ThreeQubitState,
    TwoQubitState,
    decompose,
    iter_ensemble,
    werner,
)
from .stateio import (
    CSV_HEADER_2Q,
    CSV_HEADER_3Q,
    StateFormatError,
    dumps_state,
    fmt_real,
    load_state,
)
from .steering import (
    Direction,
    cffw_value,
    horodecki_M,
    is_two_way_symmetric,
    optimal_measurements,
    steering_criterion,
)

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_STEERABLE, EXIT_MONOGAMY = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    # argparse would exit with 2, which is reserved for invalid states
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: error: {message}", EXIT_IO)


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _read_state(path: str, tol: float, repair: bool):
    try:
        return load_state(path, tol, repair)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from exc
    except StateFormatError as exc:
        raise CliError(f"cannot parse {path}: {exc}", EXIT_IO) from exc
    except StateValidationError as exc:
        raise CliError(f"invalid state in {path}: {exc.invariant} violated ({exc})", EXIT_INVALID) from exc


@contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from exc
    with fh:
        yield fh


def _input_path(args) -> str | None:
    if args.path and args.input and args.path != args.input:
        raise CliError("give the input either positionally or with --input, not both", EXIT_IO)
    return args.path or args.input


# -- analyze -----------------------------------------------------------------


def analysis_report(state: TwoQubitState, seed: int = 0, restarts: int = 24, primary=Direction.BtoA) -> dict:
    d = decompose(state)
    crit = steering_criterion(d)
    settings = OptimizationSettings(restarts=restarts, seed=seed)
    directions = {}
    for direction in Direction:
        config, frame = optimal_measurements(d, direction)
        numeric = maximize_cffw_numeric(d, direction, settings)
        directions[direction.value] = {
            "optimal_configuration": {
                **config.as_dict(),
                "c_hat": frame.c_hat.tolist(),
                "c_prime_hat": frame.c_prime_hat.tolist(),
                "theta": frame.theta,
            },
            "achieved_value": cffw_value(d, config, direction),
            "numeric_value": numeric.value,
            "numeric_converged": numeric.converged,
            "oracle_gap": abs(numeric.value - crit.max_cffw),
        }
    return {
        "input_digest": state_digest(state),
        "bloch": {"r": d.r.tolist(), "s": d.s.tolist(), "T": d.T.tolist()},
        "steering": {
            "v": crit.v,
            "v_tilde": crit.v_tilde,
            "S": crit.s_rho,
            "max_cffw": crit.max_cffw,
            "violates": crit.violates,
        },
        "horodecki_M": horodecki_M(d),
        "two_way_symmetric": is_two_way_symmetric(d),
        "primary_direction": Direction.parse(primary).value,
        "optimal_configuration": directions[Direction.parse(primary).value]["optimal_configuration"],
        "directions": directions,
        "seed": seed,
        "restarts": restarts,
    }


def cmd_analyze(args) -> int:
    path = _input_path(args)
    if path is None:
        raise CliError("analyze needs an input state file", EXIT_IO)
    state = _read_state(path, args.tolerance, args.repair)
    if not isinstance(state, TwoQubitState):
        raise CliError(f"analyze needs a two-qubit state, {path} holds {state.n_qubits} qubits", EXIT_INVALID)
    report = analysis_report(state, args.seed, args.restarts, args.direction)
    with _output(args.out) as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return EXIT_STEERABLE if report["steering"]["violates"] else EXIT_OK


# -- werner-threshold ----------------------------------------------------------


def werner_threshold(criterion: str = "cffw", tolerance: float = 1e-12) -> tuple[float, int]:
    """Bisect for the Werner weight where the criterion crosses 1.

    ``cffw`` uses ``S(rho)``, ``chsh`` the Horodecki ``M``; both cross at the
    same weight. Returns ``(p_star, iterations)``.
    """
    if criterion == "cffw":
        def g(p):
            return steering_criterion(werner(p)).s_rho - 1.0
    elif criterion == "chsh":
        def g(p):
            return horodecki_M(werner(p)) - 1.0
    else:
        raise ValueError(f"unknown criterion {criterion!r}")

    lo, hi = 0.0, 1.0
    if not (g(lo) < 0.0 < g(hi)):
        raise RuntimeError("Werner family does not bracket the threshold")
    iterations = 0
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        iterations += 1
    return 0.5 * (lo + hi), iterations


def cmd_werner_threshold(args) -> int:
    tol = args.tolerance if args.tolerance is not None else 1e-12
    p_star, iterations = werner_threshold(args.criterion, tol)
    print(json.dumps({"criterion": args.criterion, "p_star": p_star, "iterations": iterations, "tolerance": tol}))
    return EXIT_OK


# -- monogamy ------------------------------------------------------------------


def _report_row(index: int, report) -> list[str]:
    return [str(index), *(fmt_real(x) for x in (report.s_ba_max, report.s_ca_max, report.lhs, report.slack))]


def cmd_monogamy(args) -> int:
    path = _input_path(args)
    if args.scan:
        if path:
            raise CliError("use either an input file or --scan, not both", EXIT_IO)
        if args.seed is None:
            raise CliError("--scan requires an explicit --seed", EXIT_IO)
        if args.scan not in ("haar_pure_3q", "ginibre_mixed_3q"):
            raise CliError(f"--scan needs a three-qubit kind, got {args.scan}", EXIT_IO)
        spec = EnsembleSpec(args.scan, args.samples, args.seed)
        summary = monogamy_scan(spec, keep_reports=args.format == "csv")
        with _output(args.out) as fh:
            if args.format == "csv":
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(CSV_HEADER_3Q)
                writer.writerows(_report_row(k, r) for k, r in enumerate(summary.reports))
            else:
                json.dump({"kind": spec.kind, "seed": spec.seed, **summary.as_dict(), "bound": BOUND}, fh, indent=2)
                fh.write("\n")
        return EXIT_MONOGAMY if summary.violations else EXIT_OK

    if path is None:
        raise CliError("monogamy needs an input state file or --scan KIND", EXIT_IO)
    state = _read_state(path, args.tolerance, args.repair)
    if not isinstance(state, ThreeQubitState):
        raise CliError(f"monogamy needs a three-qubit state, {path} holds {state.n_qubits} qubits", EXIT_INVALID)
    report = monogamy_check(state)
    with _output(args.out) as fh:
        json.dump({"input_digest": state_digest(state), **vars(report)}, fh, indent=2)
        fh.write("\n")
    return EXIT_MONOGAMY if report.lhs > BOUND + VIOLATION_TOL else EXIT_OK


# -- sample --------------------------------------------------------------------


def cmd_sample(args) -> int:
    if args.seed is None:
        raise CliError("sample requires an explicit --seed", EXIT_IO)
    spec = EnsembleSpec(args.kind, args.samples, args.seed)
    # build in memory first so a failure never leaves a partial file
    buf = io.StringIO()
    if args.format == "json":
        for state in iter_ensemble(spec):
            buf.write(dumps_state(state) + "\n")
    elif spec.n_qubits == 2:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER_2Q)
        for k, state in enumerate(iter_ensemble(spec)):
            crit = steering_criterion(state)
            # M is recomputed on its own path; S**2 == M is checked by tests
            m = horodecki_M(state)
            writer.writerow([k, fmt_real(crit.s_rho), fmt_real(m), "true" if crit.violates else "false"])
    else:
        summary = monogamy_scan(spec, keep_reports=True)
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER_3Q)
        writer.writerows(_report_row(k, r) for k, r in enumerate(summary.reports))
    with _output(args.out) as fh:
        fh.write(buf.getvalue())
    return EXIT_OK


# -- wiring --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="steerscope", description="Two-qubit CFFW steering analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def state_options(p):
        p.add_argument("path", nargs="?", help="state JSON file")
        p.add_argument("--input", metavar="PATH", help="state JSON file")
        p.add_argument("--tolerance", type=float, default=STATE_TOL, help="validation tolerance")
        p.add_argument("--repair", action="store_true", help="clip small negative eigenvalues")
        p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("analyze", help="full steering report for a two-qubit state")
    state_options(p)
    p.add_argument("--direction", type=Direction.parse, default=Direction.BtoA, help="btoa or atob")
    p.add_argument("--seed", type=_u64, default=0, help="seed for the numeric oracle")
    p.add_argument("--restarts", type=_positive_int, default=24)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("werner-threshold", help="Werner weight where steering sets in")
    p.add_argument("--criterion", choices=("cffw", "chsh"), default="cffw")
    p.add_argument("--tolerance", type=float, default=None, help="bisection bracket width")
    p.set_defaults(func=cmd_werner_threshold)

    p = sub.add_parser("monogamy", help="monogamy check for a three-qubit state or ensemble")
    state_options(p)
    p.add_argument("--scan", metavar="KIND", help="scan a three-qubit ensemble instead of a file")
    p.add_argument("--samples", type=_positive_int, default=1000)
    p.add_argument("--seed", type=_u64)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_monogamy)

    p = sub.add_parser("sample", help="write random states or per-state rows")
    p.add_argument("--kind", choices=ENSEMBLE_KINDS, required=True)
    p.add_argument("--samples", type=_positive_int, required=True)
    p.add_argument("--seed", type=_u64)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
