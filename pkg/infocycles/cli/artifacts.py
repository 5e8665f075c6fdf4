"""
CSV artifacts with a provenance comment line.

Every file starts with `# infocycles <version> command=<name> config=<hash>`
followed by a header row. Floats are written with 12 significant digits
and nothing time-dependent is recorded, so identical runs produce
identical bytes.
"""

from pathlib import Path

import pandas as pd

from infocycles import __version__
from infocycles.cli.config import RunConfig
from infocycles.cli.registry import producer_of
from infocycles.model.errors import MissingArtifactError

FLOAT_FORMAT = "%.12g"
DIGEST_CHARS = 16


def provenance_line(command: str, config: RunConfig) -> str:
    return f"# infocycles {__version__} command={command} config={config.digest()[:DIGEST_CHARS]}\n"


def write_artifact(frame: pd.DataFrame, out_dir: Path, name: str, command: str, config: RunConfig) -> Path:
    """
    Write a DataFrame as a CSV artifact.

    Args:
        frame: Table to write (the index is dropped)
        out_dir: Output directory, created when missing
        name: File name, e.g. "value.csv"
        command: Producing command, recorded in the provenance line
        config: Run configuration, recorded by hash

    Returns:
        Path of the written file
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(provenance_line(command, config))
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_text(text: str, out_dir: Path, name: str, command: str, config: RunConfig) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(provenance_line(command, config))
        f.write(text if text.endswith("\n") else text + "\n")
    return path


def read_artifact(out_dir: Path, name: str) -> pd.DataFrame:
    """
    Read a CSV artifact written by an earlier command.

    Raises:
        MissingArtifactError: the file does not exist; names the command producing it
    """
    path = Path(out_dir) / name
    if not path.exists():
        raise MissingArtifactError(name, producer_of(name))
    return pd.read_csv(path, comment="#")
