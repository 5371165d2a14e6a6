import argparse
import sys
from typing import Any, Optional, Sequence

import pydantic
import structlog
import yaml

from khrefine.commands import command_ids
from khrefine.errors import KhRefineError
from khrefine.log_config import configure_logging
from khrefine.main import Settings, main as run_job
from khrefine.models.artifacts import ErrorDetail, ErrorReport
from khrefine.models.jobs import JobSpec, OperationSource
from khrefine.services.report_service import FileReportService, ReportService, StdoutReportService

log = structlog.get_logger()


class CliSettings(Settings):
    class Config:
        env_prefix = 'KHREFINE_'

        @classmethod
        def parse_env_var(cls, field_name: str, raw_val: str) -> Any:
            return yaml.safe_load(raw_val)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--pd", help="PD code, e.g. 'PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]'")
    source.add_argument("--knot", dest="pd_path", help="file holding a PD code or its JSON form")
    common.add_argument("--name", help="name reported for the diagram")
    common.add_argument("--field", default="f2", help="f2, f3, f5, ... (fp for a prime p) or q")
    common.add_argument("--ring", help="coefficient ring for kh/bn/cobordism when it differs from --field, e.g. z")
    common.add_argument("--modulus", "-m", type=int, help="m for s^{Z,m}")
    common.add_argument("--op", help="operation for refine/op: sq1, zero, or an operation-matrix file")
    common.add_argument("--mirror-op", help="operation-matrix file for the mirror, needed with a file --op")
    common.add_argument("--degree", type=int, default=1, help="degree of the zero operation")
    common.add_argument("--movie", dest="movie_path", help="movie file (JSON or YAML list of moves)")
    common.add_argument("--flavor", choices=["kh", "bn"], default="bn", help="complex flavor for cobordism")
    common.add_argument("--sign-seed", type=int, help="build with a random valid sign assignment")
    common.add_argument("--output", "-o", help="write JSON here instead of standard output")
    common.add_argument("--threads", type=int, help="worker processes for batch")
    common.add_argument("--check-d-squared", action="store_true", default=None, help="verify δ² = 0")
    common.add_argument("--no-simplify", dest="simplify", action="store_false", default=None,
                        help="compute ranks without Gaussian elimination")
    common.add_argument("--json-logs", dest="pretty_logs", action="store_false", default=None,
                        help="render logs as JSON lines")
    common.add_argument("--log-level", help="debug, info, warning or error")

    parser = argparse.ArgumentParser(
        prog="khrefine",
        description="Khovanov homology, the s-invariant and its refinements by cohomology operations",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")
    for command_id in command_ids():
        sub = commands.add_parser(command_id, parents=[common])
        if command_id == "batch":
            sub.add_argument("--corpus", dest="corpus_path", required=True, help="name<TAB>PD[...] per line")
            sub.add_argument("--cmd", dest="batch_command", required=True, help="command to run on each row")
    return parser


def operation_source(op: Optional[str], mirror_op: Optional[str], degree: int) -> OperationSource:
    if op is None or op == "sq1":
        return OperationSource(kind="sq1")
    if op == "zero":
        return OperationSource(kind="zero", degree=degree)
    return OperationSource(kind="file", path=op, mirror_path=mirror_op)


def _publish_unexpected(report_service: ReportService, error: Exception):
    report_service.publish(ErrorReport(error=ErrorDetail(type=error.__class__.__name__, message=str(error))))


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    settings = CliSettings.parse_obj({})  # pyright workaround
    overrides = {
        key: getattr(args, key)
        for key in ("threads", "check_d_squared", "simplify", "pretty_logs", "log_level")
        if getattr(args, key) is not None
    }
    settings = settings.copy(update=overrides)
    configure_logging(pretty=settings.pretty_logs, level=settings.log_level)

    report_service: ReportService
    if args.output:
        report_service = FileReportService(args.output)
    else:
        report_service = StdoutReportService()

    try:
        job = JobSpec(
            command=args.command,
            pd=args.pd,
            pd_path=args.pd_path,
            corpus_path=getattr(args, "corpus_path", None),
            name=args.name,
            field=args.field,
            ring=args.ring,
            modulus=args.modulus,
            operation=operation_source(args.op, args.mirror_op, args.degree),
            movie_path=args.movie_path,
            flavor=args.flavor,
            batch_command=getattr(args, "batch_command", None),
            sign_seed=args.sign_seed,
            output=args.output,
        )
        run_job(job, report_service, settings)
    except KhRefineError as e:
        log.error("Command failed", type=e.__class__.__name__, message=e.message, context=e.context)
        report_service.publish_error(e)
        return e.exit_code
    except (pydantic.ValidationError, ValueError) as e:
        log.error("Invalid input", message=str(e))
        _publish_unexpected(report_service, e)
        return 1
    return 0


def main():
    sys.exit(run(sys.argv[1:]))
