from khrefine.commands.base import CommandBase
from khrefine.models.artifacts import SResult
from khrefine.models.jobs import JobSpec


class SInvariantCommand(CommandBase):
    #: The ID of the command
    id = "s"

    def _run(self, job: JobSpec) -> SResult:
        return self.services.invariant_service.s_field(self.load_diagram(job), self.field(job))
