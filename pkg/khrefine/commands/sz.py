from khrefine.commands.base import CommandBase
from khrefine.errors import UnsupportedModulus
from khrefine.models.artifacts import SIntegralResult
from khrefine.models.jobs import JobSpec


class IntegralSInvariantCommand(CommandBase):
    """s^{Z,m}: surjectivity of Z/m and Z ⊕ Z/m onto the integral filtration cokernels."""

    #: The ID of the command
    id = "sz"

    def _run(self, job: JobSpec) -> SIntegralResult:
        if job.modulus is None:
            raise UnsupportedModulus("The sz command needs --modulus m with m >= 1")
        return self.services.invariant_service.s_integral(self.load_diagram(job), job.modulus)
