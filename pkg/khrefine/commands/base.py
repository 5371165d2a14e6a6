import time
from typing import ClassVar, Optional

import pydantic
import structlog

from khrefine.algebra.rings import Ring, get_field, get_ring
from khrefine.errors import PDSyntaxError, PreconditionError
from khrefine.models.artifacts import Artifact
from khrefine.models.diagram import PlanarDiagram
from khrefine.models.jobs import JobSpec
from khrefine.services.cobordism_service import CobordismService
from khrefine.services.complex_service import ComplexService
from khrefine.services.cube_service import CubeService
from khrefine.services.diagram_service import DiagramService
from khrefine.services.homology_service import HomologyService
from khrefine.services.invariant_service import InvariantService
from khrefine.services.operation_service import OperationService


class ServiceBundle(pydantic.BaseModel):
    """The services a command may call, wired to share caches."""
    diagram_service: DiagramService
    cube_service: CubeService
    complex_service: ComplexService
    homology_service: HomologyService
    operation_service: OperationService
    invariant_service: InvariantService
    cobordism_service: CobordismService

    class Config:
        arbitrary_types_allowed = True

    @classmethod
    def create(cls, check_d_squared: bool = False, simplify: bool = True) -> 'ServiceBundle':
        diagram_service = DiagramService()
        cube_service = CubeService()
        complex_service = ComplexService(
            diagram_service=diagram_service,
            cube_service=cube_service,
            check_d_squared=check_d_squared,
        )
        homology_service = HomologyService(complex_service=complex_service, simplify=simplify)
        operation_service = OperationService(homology_service=homology_service)
        return cls(
            diagram_service=diagram_service,
            cube_service=cube_service,
            complex_service=complex_service,
            homology_service=homology_service,
            operation_service=operation_service,
            invariant_service=InvariantService(
                homology_service=homology_service,
                operation_service=operation_service,
                diagram_service=diagram_service,
            ),
            cobordism_service=CobordismService(
                homology_service=homology_service,
                diagram_service=diagram_service,
            ),
        )


class CommandBase:
    """
    Base class for command-line commands.
    A command reads its input diagram from the job, calls the services, and returns
    the JSON artifact to report.
    """

    #: The ID of the command, as typed on the command line. Set it in the subclass.
    id: ClassVar[str]

    def __init__(
        self,
        services: ServiceBundle,
        threads: Optional[int] = None,
        **kwargs,
    ):
        self.services = services
        self.threads = threads

        self.log = structlog.get_logger(service="command", id=self.id)
        if kwargs:
            self.log.warning("Command did not use additional options", kwargs=kwargs)

    def run(self, job: JobSpec) -> Artifact:
        started = time.monotonic()
        self.log.debug("Running command", diagram=job.name, field=job.field)
        artifact = self._run(job)
        self.log.info("Ran command", elapsed=round(time.monotonic() - started, 3))
        return artifact

    def _run(self, job: JobSpec) -> Artifact:
        """
        Override this method to implement the command.
        """
        raise NotImplementedError

    # Helpers shared by the commands

    def load_diagram(self, job: JobSpec) -> PlanarDiagram:
        if job.pd is not None:
            return self.services.diagram_service.parse_pd(job.pd, name=job.name)
        if job.pd_path is not None:
            try:
                with open(job.pd_path, encoding="utf-8") as f:
                    text = f.read()
            except OSError as e:
                raise PDSyntaxError(f"Cannot read diagram file {job.pd_path}: {e.strerror}", path=job.pd_path)
            return self.services.diagram_service.parse_pd(text, name=job.name or job.pd_path)
        raise PreconditionError(f"The {self.id} command needs a diagram (--pd or --knot)")

    def field(self, job: JobSpec) -> Ring:
        return get_field(job.field)

    def ring(self, job: JobSpec) -> Ring:
        return get_ring(job.ring or job.field)
