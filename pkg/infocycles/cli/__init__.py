from .artifacts import read_artifact, write_artifact
from .config import RunConfig, load_config, parse_config_text
from .registry import COMMANDS, Command, CommandOutcome, register_command
from . import commands  # noqa: F401  registers the subcommands
from .main import main

__all__ = [
    'COMMANDS',
    'Command',
    'CommandOutcome',
    'RunConfig',
    'load_config',
    'main',
    'parse_config_text',
    'read_artifact',
    'register_command',
    'write_artifact',
]
