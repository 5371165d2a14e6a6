from khrefine.commands.base import CommandBase
from khrefine.models.artifacts import HomologyTable
from khrefine.models.cube import Flavor
from khrefine.models.jobs import JobSpec


class BarNatanCommand(CommandBase):
    """Dimensions of Bar-Natan homology per homological grading."""

    #: The ID of the command
    id = "bn"

    def _run(self, job: JobSpec) -> HomologyTable:
        diagram = self.load_diagram(job)
        ring = self.ring(job)
        signs = None
        if job.sign_seed is not None:
            signs = self.services.cube_service.random_signs(diagram.crossing_count, job.sign_seed)
        complex_ = self.services.homology_service.complex(diagram, Flavor.BAR_NATAN, ring, signs)
        if ring.is_field:
            return self.services.homology_service.field_homology(complex_)
        return self.services.homology_service.integral_homology(complex_)
