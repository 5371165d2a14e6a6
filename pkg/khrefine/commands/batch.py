from concurrent.futures import ProcessPoolExecutor
from typing import Any, Optional

import structlog

from khrefine.commands.base import CommandBase, ServiceBundle
from khrefine.errors import KhRefineError, PDSyntaxError, PreconditionError
from khrefine.models.artifacts import BatchResult, BatchRow, ErrorDetail
from khrefine.models.jobs import JobSpec
from khrefine.utils.pd_parser import parse_corpus_text

log = structlog.get_logger(service="command", id="batch")


def run_row(job: JobSpec, services: ServiceBundle) -> BatchRow:
    from khrefine.commands import get_command

    try:
        artifact = get_command(job.command, services=services).run(job)
    except KhRefineError as e:
        return BatchRow(name=job.name or "", error=ErrorDetail(**e.to_dict()))
    except Exception as e:
        # every row ends with a result or an error
        log.exception("Row failed", name=job.name, exc_info=e)
        return BatchRow(name=job.name or "", error=ErrorDetail(type=e.__class__.__name__, message=str(e)))
    return BatchRow(name=job.name or "", result=artifact.to_dict())


def _run_row_in_worker(job_json: str, check_d_squared: bool, simplify: bool) -> dict[str, Any]:
    services = ServiceBundle.create(check_d_squared=check_d_squared, simplify=simplify)
    return run_row(JobSpec.parse_raw(job_json), services).dict()


class BatchCommand(CommandBase):
    """
    Run one command over every diagram of a corpus file (`name<TAB>PD[...]` per
    line). Rows come back in corpus order however many workers run them.
    """

    #: The ID of the command
    id = "batch"

    def load_corpus(self, path: Optional[str]) -> list[tuple[str, str]]:
        if path is None:
            raise PreconditionError("The batch command needs --corpus")
        try:
            with open(path, encoding="utf-8") as f:
                return parse_corpus_text(f.read())
        except OSError as e:
            raise PDSyntaxError(f"Cannot read corpus {path}: {e.strerror}", path=path)

    def _run(self, job: JobSpec) -> BatchResult:
        command_id = job.batch_command
        if command_id is None or command_id == self.id:
            raise PreconditionError("The batch command needs --cmd naming another command")
        entries = self.load_corpus(job.corpus_path)
        jobs = [job.with_pd(pd, name) for name, pd in entries]

        workers = min(self.threads or 1, len(jobs))
        if workers <= 1:
            rows = [run_row(row_job, self.services) for row_job in jobs]
        else:
            check = self.services.complex_service.check
            simplify = self.services.homology_service.simplify
            with ProcessPoolExecutor(max_workers=workers) as executor:
                results = executor.map(
                    _run_row_in_worker,
                    [row_job.json() for row_job in jobs],
                    [check] * len(jobs),
                    [simplify] * len(jobs),
                )
                rows = [BatchRow.parse_obj(result) for result in results]

        failed = sum(1 for row in rows if row.error is not None)
        self.log.info("Ran batch", command=command_id, rows=len(rows), failed=failed, workers=workers)
        return BatchResult(command=command_id, rows=rows)
