"""File helpers for reports, traces and captures.

Tables (NoC traces, irq event logs, CSV captures, the run log) go through
pandas.  JSON reports are written with a stable layout and accept numpy
scalars and arrays, so two identical runs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np
import pandas as pd


def expand(path_tmpl: str, **kw: Any) -> str:
    """Fill ``{seed}`` / ``{name}`` style placeholders in a file-name template."""
    return path_tmpl.format(**kw)


def file_hash(path: str | Path) -> str:
    """SHA256 of a file, read in 64 KiB chunks."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        while chunk := fh.read(1 << 16):
            digest.update(chunk)
    return digest.hexdigest()


def write_table(
    obj: Union[pd.DataFrame, Iterable[Dict[str, Any]]],
    path: str | Path,
    headers: Sequence[str] | None = None,
) -> None:
    """Write a DataFrame or dict rows as CSV, creating parent folders.

    ``headers`` fixes the column order and gives an empty table its header
    line.
    """
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(obj, pd.DataFrame):
        df = obj if headers is None else obj.loc[:, list(headers)]
    else:
        df = pd.DataFrame(list(obj), columns=list(headers) if headers else None)
    df.to_csv(p, index=False, lineterminator="\n")


def read_table(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path)


def table_records(obj: Union[pd.DataFrame, Iterable[Dict[str, Any]]]) -> List[Dict[str, Any]]:
    if isinstance(obj, pd.DataFrame):
        return obj.to_dict(orient="records")
    return list(obj)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def dumps_json(data: Any) -> str:
    return json.dumps(data, indent=2, default=_json_default) + "\n"


def write_json(data: Any, path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(dumps_json(data), encoding="utf-8")


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))
