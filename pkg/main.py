"""
modeq command line.

    python main.py kiepert -p 5
    python main.py double-eta --p1 3 --p2 7 --format json
    python main.py params --table 13
    python main.py series j --terms 10
    python main.py verify modeq-cache/w_3_7_e1.direct.json
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import Callable, List, Optional

from modeq import __version__
from modeq.core.config import settings
from modeq.core.errors import ModEqError
from modeq.models.schemas import EngineKind, EquationRecord, FunctionFamily, OutputFormat, SeriesKind
from modeq.services.crt_engine import CrtEngine
from modeq.services.double_eta import (
    UnsupportedPair,
    build_double_eta,
    derive_params,
    double_eta_function,
    double_eta_label,
    supported_pairs,
)
from modeq.services.equation_io import EquationCache, build_record, format_equation, record_to_equation
from modeq.services.kiepert import UnsupportedPrime, build_kiepert, weber_label
from modeq.services.modular_forms import form_series
from modeq.services.numeric_verify import FunctionSpec, check_equation, check_series_identities, weber_square

logger = logging.getLogger("modeq")

USAGE_ERRORS = (UnsupportedPair, UnsupportedPrime)


# ============================================================================
# Logging
# ============================================================================


class JsonLogFormatter(logging.Formatter):
    """One JSON object per record: timestamp, level, logger, message."""

    def format(self, record: logging.LogRecord) -> str:
        return json.dumps({
            "timestamp": self.formatTime(record),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        })


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    handler = logging.StreamHandler(sys.stderr)
    if (fmt or settings.LOG_FORMAT) == "json":
        handler.setFormatter(JsonLogFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    logging.basicConfig(level=(level or settings.LOG_LEVEL).upper(), handlers=[handler], force=True)


# ============================================================================
# Helpers
# ============================================================================


def _emit(text: str) -> None:
    sys.stdout.write(text.rstrip("\n") + "\n")


def _crt_engine(args: argparse.Namespace) -> Optional[CrtEngine]:
    if not (args.crt or args.primes):
        return None
    return CrtEngine(prime_bits=args.prime_bits, workers=args.workers, primes=args.primes)


def _engine_kind(args: argparse.Namespace) -> EngineKind:
    return EngineKind.CRT if (args.crt or args.primes) else EngineKind.DIRECT


def _samples(args: argparse.Namespace) -> int:
    if args.no_verify:
        return 0
    return settings.VERIFY_SAMPLES if args.verify is None else args.verify


def _emit_record(record: EquationRecord, fmt: OutputFormat) -> None:
    if fmt == OutputFormat.JSON:
        _emit(record.model_dump_json(indent=2))
    else:
        _emit(format_equation(record_to_equation(record)))


def _function_spec(record: EquationRecord) -> FunctionSpec:
    if record.family == FunctionFamily.WEBER:
        return weber_square(int(record.params["p"]))
    return double_eta_function(derive_params(int(record.params["p1"]), int(record.params["p2"])))


def _record_label(record: EquationRecord, sign: int) -> str:
    if record.family == FunctionFamily.WEBER:
        return weber_label(int(record.params["p"]), sign)
    return double_eta_label(derive_params(int(record.params["p1"]), int(record.params["p2"])), sign)


def _needs_verification(record: EquationRecord, args: argparse.Namespace) -> bool:
    """A cached record lacks the oracle run this invocation asks for."""
    samples = _samples(args)
    if not samples:
        return False
    seed = settings.VERIFY_SEED if args.seed is None else args.seed
    report = record.verification
    return report is None or (report.samples, report.seed) != (samples, seed)


def _verify_record(record: EquationRecord, samples: int, seed: Optional[int]) -> EquationRecord:
    report = check_equation(record_to_equation(record), _function_spec(record), samples=samples, seed=seed)
    logger.info(f"{record.label}: re-verified cached record, vanishing sign {report.chosen_sign:+d}")
    return record.model_copy(update={
        "verification": report,
        "sign": report.chosen_sign,
        "label": _record_label(record, report.chosen_sign),
    })


def _cached_or_build(
    args: argparse.Namespace,
    key: str,
    build: Callable[[], EquationRecord],
) -> EquationRecord:
    """Reuse a cached record unless --refresh, re-running the oracle when asked; otherwise build and store it."""
    cache = EquationCache(args.cache)
    engine = _engine_kind(args)
    if not args.refresh:
        record = cache.load(key, engine)
        if record is not None:
            if _needs_verification(record, args):
                record = _verify_record(record, _samples(args), args.seed)
                cache.store(key, record)
            return record
    record = build()
    cache.store(key, record)
    return record


# ============================================================================
# Commands
# ============================================================================


def cmd_kiepert(args: argparse.Namespace) -> int:
    """Modular equation of +-w_p^2."""
    p = args.p

    def build() -> EquationRecord:
        equation = build_kiepert(
            p,
            guard=args.terms_guard,
            engine=_engine_kind(args),
            crt=_crt_engine(args),
            samples=_samples(args),
            seed=args.seed,
        )
        return build_record(equation, FunctionFamily.WEBER, {"p": p, "degree": p + 1}, _engine_kind(args))

    record = _cached_or_build(args, f"weber_p{p}", build)
    _emit_record(record, args.format)
    return 0


def cmd_double_eta(args: argparse.Namespace) -> int:
    """Modular equation of +-w_{p1,p2}^e."""
    params = derive_params(args.p1, args.p2, args.e)

    def build() -> EquationRecord:
        equation = build_double_eta(
            params.p1,
            params.p2,
            e=params.e,
            guard=args.terms_guard,
            engine=_engine_kind(args),
            crt=_crt_engine(args),
            samples=_samples(args),
            seed=args.seed,
        )
        return build_record(equation, FunctionFamily.DOUBLE_ETA, params.as_dict(), _engine_kind(args))

    record = _cached_or_build(args, f"w_{params.p1}_{params.p2}_e{params.e}", build)
    _emit_record(record, args.format)
    return 0


def cmd_params(args: argparse.Namespace) -> int:
    if args.table is not None:
        rows = supported_pairs(args.table)
    elif args.p1 is None or args.p2 is None:
        raise UnsupportedPair("params needs --p1 and --p2, or --table BOUND")
    else:
        rows = [derive_params(args.p1, args.p2)]

    if args.format == OutputFormat.JSON:
        payload = [row.as_dict() for row in rows]
        _emit(json.dumps(payload if args.table is not None else payload[0], indent=2))
    else:
        for row in rows:
            _emit(str(row))
    return 0


def cmd_series(args: argparse.Namespace) -> int:
    series = form_series(
        args.kind,
        args.terms,
        scale=Fraction(args.scale),
        p1=args.p1,
        p2=args.p2,
        e=args.e or 1,
        modulus=args.modulus,
    )
    if args.format == OutputFormat.JSON:
        _emit(json.dumps(series.to_dict(), indent=2))
    else:
        _emit(series.format(max_terms=args.show))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    """Re-run the numeric oracle on a stored record, or check the series identities."""
    samples = settings.VERIFY_SAMPLES if args.samples is None else args.samples
    if args.file is None:
        _emit(check_series_identities().model_dump_json(indent=2))
        return 0

    with open(args.file) as handle:
        record = EquationRecord.model_validate_json(handle.read())
    report = check_equation(record_to_equation(record), _function_spec(record), samples=samples, seed=args.seed)
    logger.info(f"{record.label}: vanishing sign {report.chosen_sign:+d}")
    _emit(report.model_dump_json(indent=2))
    return 0


# ============================================================================
# Parser
# ============================================================================


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", type=OutputFormat, choices=list(OutputFormat), default=OutputFormat.TEXT)
    common.add_argument("--log-level", default=None, help="overrides LOG_LEVEL")
    common.add_argument("--seed", type=int, default=None, help="oracle seed (VERIFY_SEED)")

    pipeline = argparse.ArgumentParser(add_help=False)
    pipeline.add_argument("--crt", action="store_true", help="use the multi-modular engine")
    pipeline.add_argument("--primes", type=int, default=None, help="fixed number of CRT primes (implies --crt)")
    pipeline.add_argument("--prime-bits", type=int, default=None, help="CRT prime size (CRT_PRIME_BITS)")
    pipeline.add_argument("--workers", type=int, default=None, help="CRT worker processes (CRT_WORKERS)")
    pipeline.add_argument("--terms-guard", type=int, default=None, help="extra series terms (TERMS_GUARD)")
    pipeline.add_argument("--verify", type=int, default=None, metavar="N", help="oracle sample points")
    pipeline.add_argument("--no-verify", action="store_true", help="skip the numeric oracle")
    pipeline.add_argument("--cache", default=None, help="cache directory (MODEQ_CACHE)")
    pipeline.add_argument("--refresh", action="store_true", help="ignore a cached record")

    parser = argparse.ArgumentParser(
        prog="modeq",
        description="Modular equations of Weber functions and double eta-quotients.",
    )
    parser.add_argument("--version", action="version", version=f"modeq {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    kiepert = commands.add_parser("kiepert", parents=[common, pipeline], help="equation of +-w_p^2, p > 3")
    kiepert.add_argument("-p", type=int, required=True)
    kiepert.set_defaults(handler=cmd_kiepert)

    double_eta = commands.add_parser("double-eta", parents=[common, pipeline], help="equation of +-w_{p1,p2}^e")
    double_eta.add_argument("--p1", type=int, required=True)
    double_eta.add_argument("--p2", type=int, required=True)
    double_eta.add_argument("--e", type=int, default=None)
    double_eta.set_defaults(handler=cmd_double_eta)

    params = commands.add_parser("params", parents=[common], help="derived parameters of a prime pair")
    params.add_argument("--p1", type=int)
    params.add_argument("--p2", type=int)
    params.add_argument("--table", type=int, metavar="BOUND", help="every supported pair up to BOUND")
    params.set_defaults(handler=cmd_params)

    series = commands.add_parser("series", parents=[common], help="print a q-expansion")
    series.add_argument("kind", type=SeriesKind, choices=list(SeriesKind))
    series.add_argument("--terms", type=int, default=20)
    series.add_argument("--scale", default="1", help="eta(scale z), e.g. 7 or 1/7")
    series.add_argument("--p1", type=int)
    series.add_argument("--p2", type=int)
    series.add_argument("--e", type=int)
    series.add_argument("--modulus", type=int, default=None)
    series.add_argument("--show", type=int, default=12, help="terms printed in text format")
    series.set_defaults(handler=cmd_series)

    verify = commands.add_parser("verify", parents=[common], help="numeric oracle for a stored equation")
    verify.add_argument("file", nargs="?", help="EquationRecord JSON; omitted checks the series identities")
    verify.add_argument("--samples", type=int, default=None)
    verify.set_defaults(handler=cmd_verify)

    return parser


def _report_error(error: Exception, fmt: OutputFormat) -> None:
    name = type(error).__name__
    if fmt == OutputFormat.JSON:
        sys.stderr.write(json.dumps({"error": name, "message": str(error)}) + "\n")
    else:
        sys.stderr.write(f"error: {name}: {error}\n")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except USAGE_ERRORS as e:
        _report_error(e, args.format)
        return 2
    except ModEqError as e:
        logger.error(f"{args.command} failed: {e}")
        _report_error(e, args.format)
        return 1
    except (ValueError, OSError) as e:
        _report_error(e, args.format)
        return 2


if __name__ == "__main__":
    sys.exit(main())
