"""
Utility functions for the doubly degenerate lab
"""

import logging
import os
from pathlib import Path
from typing import List, Optional

from rich.console import Console
from rich.logging import RichHandler

console = Console()

# Significant digits used for every number written to an output file
FLOAT_DIGITS = 17


def expand_path(path: str) -> Path:
    """
    Expand a path with ~ and environment variables.
    """
    expanded = os.path.expanduser(os.path.expandvars(str(path)))
    return Path(expanded).resolve()


def ensure_dir(path: str) -> Path:
    """
    Resolve an output directory and create it if it doesn't exist.
    """
    out = expand_path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def parse_csv_floats(text: str) -> List[float]:
    """
    Parse a comma separated list of numbers ("0.1,0.2,0.5").

    Raises:
        ValueError: if the list is empty or an entry isn't a number
    """
    parts = [part.strip() for part in str(text).split(",") if part.strip()]
    if not parts:
        raise ValueError(f"Expected a comma separated list of numbers, got '{text}'")
    try:
        return [float(part) for part in parts]
    except ValueError as e:
        raise ValueError(f"Invalid number in '{text}': {e}") from e


def configure_logging(verbosity: int = 0) -> logging.Logger:
    """
    Attach a rich handler to the package logger.

    Args:
        verbosity: 0 -> WARNING, 1 -> INFO, 2+ -> DEBUG

    Returns:
        The configured "ddlab" logger
    """
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG

    logger = logging.getLogger("ddlab")
    # Re-running the CLI in one process (tests) must not stack handlers
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)

    handler = RichHandler(console=Console(stderr=True), show_path=False)
    handler.setLevel(level)
    logger.addHandler(handler)
    logger.setLevel(level)
    return logger


def print_success(message: str):
    """Print a success message with formatting."""
    console.print(f"[green]✓[/green] {message}")


def print_error(message: str):
    """Print an error message with formatting."""
    console.print(f"[red]✗[/red] {message}", style="bold red")


def print_warning(message: str):
    """Print a warning message with formatting."""
    console.print(f"[yellow]⚠[/yellow] {message}", style="yellow")


def print_info(message: str):
    """Print an info message with formatting."""
    console.print(f"[blue]ℹ[/blue] {message}")


def describe_path(path: Optional[Path]) -> str:
    """Short display form of an output path (home collapsed to ~)."""
    if path is None:
        return "-"
    try:
        return "~/" + str(Path(path).relative_to(Path.home()))
    except ValueError:
        return str(path)
