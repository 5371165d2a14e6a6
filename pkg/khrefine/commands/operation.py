from khrefine.commands.base import CommandBase
from khrefine.models.artifacts import OperationMatrix
from khrefine.models.jobs import JobSpec


class OperationCommand(CommandBase):
    """
    Write out an operation matrix in the file format `refine --op` reads: Sq¹, the
    zero operation, or a validated copy of an operation file.
    """

    #: The ID of the command
    id = "op"

    def _run(self, job: JobSpec) -> OperationMatrix:
        return self.services.operation_service.resolve(job.operation, self.load_diagram(job), self.field(job))
