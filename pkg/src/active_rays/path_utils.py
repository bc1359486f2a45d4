"""Path utilities for messages and output files."""

from pathlib import Path
from typing import Optional


def format_path(path: Path, cwd: Optional[Path] = None) -> str:
    """
    Format a path for console messages.

    Args:
        path: Path to format
        cwd: Directory to relativize against (defaults to the CWD)

    Returns:
        Path relative to ``cwd`` when it lies below it, else absolute
    """
    cwd = Path.cwd() if cwd is None else cwd
    try:
        return str(path.resolve().relative_to(cwd.resolve()))
    except ValueError:
        # Path is not below cwd (e.g., different drive on Windows)
        return str(path.absolute())


def prepare_output(path: Path) -> Path:
    """
    Make sure ``path`` can be written: create missing parent directories.

    Raises:
        IsADirectoryError: If the path names an existing directory
    """
    if path.is_dir():
        raise IsADirectoryError(f"output path is a directory: {path}")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path
