"""Helper functions for logging progress and producing timestamps."""

from __future__ import annotations

import logging
from datetime import datetime, timezone
from pathlib import Path

import pandas as pd

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_logger(name: str = "memsoc", verbose: bool = False) -> logging.Logger:
    """Return the package logger, attaching one stream handler on first use."""

    root = logging.getLogger("memsoc")
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)
    return logging.getLogger(name)


def append_step_log(folder: str | Path, log_row: dict) -> Path:
    """Append a row to the run log stored in ``folder``.

    The log is stored as ``run_log.csv``.  If the log does not yet exist it
    will be created.  ``log_row`` is expected to be a mapping of column names
    to values which will become a single row in the resulting file.
    """

    Path(folder).mkdir(parents=True, exist_ok=True)
    log_path = Path(folder) / "run_log.csv"
    try:
        df = pd.read_csv(log_path)
        df = pd.concat([df, pd.DataFrame([log_row])], ignore_index=True)
    except FileNotFoundError:
        df = pd.DataFrame([log_row])
    df.to_csv(log_path, index=False)
    return log_path


def now_ts() -> str:
    """Return the current UTC timestamp in ISO format."""

    return datetime.now(timezone.utc).replace(tzinfo=None).isoformat()
