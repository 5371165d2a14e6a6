from khrefine.commands.base import CommandBase
from khrefine.models.artifacts import RefinedInvariants
from khrefine.models.jobs import JobSpec


class RefineCommand(CommandBase):
    """
    r_± and s_± for a cohomology operation: the internal Sq¹, the zero operation,
    or an operation file together with its mirror counterpart.
    """

    #: The ID of the command
    id = "refine"

    def _run(self, job: JobSpec) -> RefinedInvariants:
        return self.services.invariant_service.refined_invariants(
            self.load_diagram(job),
            self.field(job),
            job.operation,
        )
