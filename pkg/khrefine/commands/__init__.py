from os.path import dirname, basename, isfile, join
import glob
from typing import Optional, Union
from typing_extensions import TypeAlias

from .base import CommandBase, ServiceBundle

file_modules = glob.glob(join(dirname(__file__), "*.py"))
file_basenames = [basename(f)[:-3] for f in file_modules if isfile(f) and not f.endswith('__init__.py')]
__all__ = file_basenames
from . import *

Command: TypeAlias = Union[tuple(CommandBase.__subclasses__())]  # type: ignore


def get_command(
    command_id: str,
    services: ServiceBundle,
    threads: Optional[int] = None,
) -> Command:
    for command in CommandBase.__subclasses__():
        if command.id == command_id:
            return command(
                services=services,
                threads=threads,
            )
    raise ValueError(f"Unknown command: {command_id}")


def command_ids() -> list[str]:
    return sorted(command.id for command in CommandBase.__subclasses__())
