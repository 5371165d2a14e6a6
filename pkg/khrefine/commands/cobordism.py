import yaml

from khrefine.commands.base import CommandBase
from khrefine.errors import InvalidMoveError, PreconditionError
from khrefine.models.artifacts import CobordismResult
from khrefine.models.cube import Flavor
from khrefine.models.jobs import JobSpec
from khrefine.models.moves import Movie


class CobordismCommand(CommandBase):
    """
    Evaluate a movie of cups, caps and saddles starting at the input diagram: the
    chain-map and filtration checks, the induced ranks on homology, and the number
    a closed surface evaluates to.
    """

    #: The ID of the command
    id = "cobordism"

    def load_movie(self, path: str) -> Movie:
        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except OSError as e:
            raise PreconditionError(f"Cannot read movie file {path}: {e.strerror}", path=path)
        except yaml.YAMLError as e:
            raise InvalidMoveError(f"Movie file {path} is not valid JSON or YAML: {e}", path=path)
        try:
            return Movie.parse_moves(data or [])
        except ValueError as e:
            raise InvalidMoveError(f"Malformed movie file {path}: {e}", path=path)

    def _run(self, job: JobSpec) -> CobordismResult:
        if job.movie_path is None:
            raise PreconditionError("The cobordism command needs --movie")
        movie = self.load_movie(job.movie_path)
        diagram = self.load_diagram(job) if (job.pd or job.pd_path) else self.services.diagram_service.parse_pd("PD[]")
        return self.services.cobordism_service.evaluate_movie(
            diagram,
            movie,
            Flavor(job.flavor),
            self.ring(job),
        )
