import os
from typing import Optional

import structlog
from pydantic import BaseSettings

from .commands import ServiceBundle, get_command
from .models.artifacts import Artifact
from .models.jobs import JobSpec
from .services.report_service import ReportService

log = structlog.get_logger()


class Settings(BaseSettings):
    #: worker processes for `batch`; all available cores when unset
    threads: Optional[int] = None
    check_d_squared: bool = False
    simplify: bool = True
    pretty_logs: bool = True
    log_level: str = 'warning'


def main(
    job: JobSpec,
    report_service: ReportService,
    settings: Settings,
) -> Artifact:
    log.info('Starting main',
             command=job.command,
             diagram=job.name,
             settings=settings)

    # Wire services together so complexes and homology blocks are shared
    services = ServiceBundle.create(
        check_d_squared=settings.check_d_squared,
        simplify=settings.simplify,
    )

    command = get_command(
        job.command,
        services=services,
        threads=settings.threads or os.cpu_count(),
    )
    artifact = command.run(job)

    report_service.publish(artifact)
    return artifact
