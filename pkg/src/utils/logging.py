"""Logging helpers."""

from __future__ import annotations

import logging
from pathlib import Path
import sys
from typing import Optional

_HANDLER_TAG = "_udisc_handler"


def setup_logging(log_dir: Optional[str | Path] = None, level: int | str = logging.INFO) -> None:
    """Log to stderr, plus ``udisc.log`` in ``log_dir`` when given.

    Calling it again replaces the handlers installed by a previous call.
    """
    formatter = logging.Formatter(
        fmt="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    root = logging.getLogger()
    root.setLevel(level)
    for handler in list(root.handlers):
        if getattr(handler, _HANDLER_TAG, False):
            root.removeHandler(handler)
            handler.close()

    # stdout is reserved for structured results.
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(formatter)
    setattr(console, _HANDLER_TAG, True)
    root.addHandler(console)

    if log_dir is not None:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path / "udisc.log")
        file_handler.setFormatter(formatter)
        setattr(file_handler, _HANDLER_TAG, True)
        root.addHandler(file_handler)
