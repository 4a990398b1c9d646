"""Comment-stream sentiment and emotion monitoring pipeline."""

from pathlib import Path

__version__ = "0.1.0"

_DATA = Path(__file__).parent / "data"


def data_path(name: str) -> Path:
    """Path of a fixture file shipped with the package."""
    return _DATA / name
