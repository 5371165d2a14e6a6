from khrefine.commands.base import CommandBase
from khrefine.models.artifacts import BasisManifest
from khrefine.models.jobs import JobSpec


class BasisCommand(CommandBase):
    """The canonical Khovanov basis and its fingerprint, for aligning external operation matrices."""

    #: The ID of the command
    id = "basis"

    def _run(self, job: JobSpec) -> BasisManifest:
        return self.services.operation_service.export_basis(self.load_diagram(job), self.field(job))
