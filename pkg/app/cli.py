"""
Command-line entry point

Usage:
    python -m app.cli add --section midpoint --in two_points.json
    python -m app.cli verify --section add-near:1,2 --n 4 --m 3 --samples 1000
    python -m app.cli homotopy --section biased:0.25 --in pair.json --frames 64
    python -m app.cli obstruct --section centroid --n 3 --seed 7
    python -m app.cli fixed --map centroid --n 3 --m 2 --seed 7
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional

from app.core.config import settings
from app.core.constants import VERSION, ExitCode
from app.core.exceptions import (HomotopyFailureError, InvalidConfigurationError,
                                 SectionViolationError)
from app.models.schemas import ErrorCode, ErrorResponse
from app.services.homotopy_service import uniqueness_homotopy
from app.services.obstruction_service import measure_coefficients
from app.services.report_service import (RunTimer, build_manifest,
                                         dump_configuration,
                                         homotopy_csv, load_configuration,
                                         parse_configuration, render_report,
                                         write_output)
from app.services.section_service import (apply_section, parse_section,
                                          verify_section)
from app.services.solver_service import (find_fixed_configuration,
                                         parse_point_map)

logger = logging.getLogger(__name__)

EXIT_CODES: Dict[ErrorCode, int] = {
    ErrorCode.INVALID_INPUT: ExitCode.USAGE_ERROR,
    ErrorCode.VALIDATION_ERROR: ExitCode.USAGE_ERROR,
    ErrorCode.SECTION_VIOLATION: ExitCode.SECTION_VIOLATION,
    ErrorCode.IDENTITY_VIOLATED: ExitCode.IDENTITY_VIOLATED,
    ErrorCode.COLLISION_WITNESS: ExitCode.COLLISION_WITNESS,
    ErrorCode.NOT_CONVERGED: ExitCode.NOT_CONVERGED,
}

# None on success
Outcome = Optional[ErrorResponse]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _read_input(path: Optional[str]):
    if path is None or path == "-":
        return parse_configuration(sys.stdin.read(), source="<stdin>")
    return load_configuration(path)


def cmd_add(args) -> Outcome:
    c = _read_input(args.input)
    out = apply_section(parse_section(args.section), c)
    write_output(dump_configuration(out), args.out)
    return None


def cmd_verify(args) -> Outcome:
    timer = RunTimer()
    report = verify_section(
        parse_section(args.section),
        n=args.n,
        m=args.m,
        sample_count=args.samples,
        rng_seed=args.seed,
        check_equivariance=True if args.equivariance else None,
    )
    report.manifest = build_manifest("verify", _params(args), args.seed, timer)
    write_output(render_report(report), args.out)
    if report.passed:
        return None
    return ErrorResponse(
        code=ErrorCode.SECTION_VIOLATION,
        message=f"section '{report.section}' failed verification",
    )


def cmd_homotopy(args) -> Outcome:
    timer = RunTimer()
    c = _read_input(args.input)
    trace = uniqueness_homotopy(parse_section(args.section), c, frames=args.frames)
    if args.csv:
        write_output(homotopy_csv(trace), args.out)
        return None
    trace.manifest = build_manifest("homotopy", _params(args), None, timer)
    write_output(render_report(trace), args.out)
    return None


def cmd_obstruct(args) -> Outcome:
    timer = RunTimer()
    report = measure_coefficients(
        parse_section(args.section),
        n=args.n,
        radius=args.radius,
        samples=args.samples,
        seed=args.seed,
        trials=args.trials,
    )
    report.manifest = build_manifest("obstruct", _params(args), args.seed, timer)
    write_output(render_report(report), args.out)
    witness = report.collision_witness
    if witness is not None:
        return ErrorResponse(
            code=ErrorCode.COLLISION_WITNESS,
            message=f"{witness.kind.value} witness on {witness.loop_id} "
            f"at frame {witness.frame_index}",
        )
    if not report.identity_holds:
        return ErrorResponse(
            code=ErrorCode.IDENTITY_VIOLATED,
            message=f"lambda={report.lambda_values} delta={report.delta_values} "
            f"fail lambda*(n-1) == 1 with vanishing delta",
        )
    return None


def cmd_fixed(args) -> Outcome:
    timer = RunTimer()
    result = find_fixed_configuration(
        parse_point_map(args.map),
        n=args.n,
        m=args.m,
        tol=args.tol,
        restarts=args.restarts,
        budget=args.budget,
        rng_seed=args.seed,
    )
    result.manifest = build_manifest("fixed", _params(args), args.seed, timer)
    write_output(render_report(result), args.out)
    if result.converged:
        return None
    return ErrorResponse(
        code=ErrorCode.NOT_CONVERGED,
        message=f"best residual {result.residual:.3e} did not reach tol {result.tol}",
    )


def _params(args) -> dict:
    return {
        k: v for k, v in vars(args).items() if k not in ("handler", "out", "quiet")
    }


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--quiet", action="store_true", help="only log warnings")

    parser = _Parser(
        prog="confspace",
        description="Point-addition constructions on configuration spaces of the ball",
    )
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("add", parents=[common], help="append a point with a section")
    p.add_argument("--section", required=True)
    p.add_argument("--in", dest="input", default=None, help="configuration JSON")
    p.set_defaults(handler=cmd_add)

    p = sub.add_parser("verify", parents=[common], help="sample-check a section")
    p.add_argument("--section", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument(
        "--equivariance",
        action="store_true",
        help="check equivariance even when the section does not declare it",
    )
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("homotopy", parents=[common], help="trace s ~ midpoint")
    p.add_argument("--section", required=True)
    p.add_argument("--in", dest="input", default=None, help="2-configuration JSON")
    p.add_argument("--frames", type=int, default=settings.homotopy_frames)
    p.add_argument("--csv", action="store_true", help="write the slot-0 track as CSV")
    p.set_defaults(handler=cmd_homotopy)

    p = sub.add_parser("obstruct", parents=[common], help="measure lambda and delta")
    p.add_argument("--section", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--no-trials", dest="trials", action="store_false")
    p.set_defaults(handler=cmd_obstruct)

    p = sub.add_parser("fixed", parents=[common], help="search a fixed configuration")
    p.add_argument("--map", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(handler=cmd_fixed)

    return parser


def dispatch(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{parser.format_usage()}{e}\n")
        return EXIT_CODES[ErrorCode.INVALID_INPUT]
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)

    logging.basicConfig(
        level=logging.WARNING
        if args.quiet
        else getattr(logging, settings.log_level.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        failure = args.handler(args)
    except (SectionViolationError, HomotopyFailureError) as e:
        logger.error(str(e))
        witness = getattr(e, "witness", None)
        if witness is not None:
            sys.stderr.write(witness.model_dump_json() + "\n")
        failure = ErrorResponse(code=ErrorCode.SECTION_VIOLATION, message=str(e))
    except InvalidConfigurationError as e:
        logger.error(str(e))
        failure = ErrorResponse(code=ErrorCode.VALIDATION_ERROR, message=str(e))
    except ValueError as e:
        logger.error(str(e))
        failure = ErrorResponse(code=ErrorCode.INVALID_INPUT, message=str(e))

    if failure is None:
        return ExitCode.SUCCESS
    sys.stderr.write(failure.model_dump_json() + "\n")
    return EXIT_CODES[failure.code]


def main() -> int:
    return dispatch(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
