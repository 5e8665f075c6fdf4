from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, NamedTuple, Tuple

from infocycles.cli.config import RunConfig


class CommandOutcome(NamedTuple):
    files: Dict[str, Path]
    converged: bool = True


@dataclass
class Command:
    """Specification for a CLI subcommand"""
    name: str
    description: str
    produces: Tuple[str, ...]
    handler: Callable[[RunConfig, Path], CommandOutcome]
    requires: Tuple[str, ...] = ()


# Global command registry
COMMANDS: Dict[str, Command] = {}


def register_command(command: Command):
    """Register a command in the global registry"""
    COMMANDS[command.name] = command


def producer_of(artifact: str) -> str:
    """Name of the registered command that writes `artifact`."""
    for command in COMMANDS.values():
        if artifact in command.produces:
            return command.name
    return "unknown"
