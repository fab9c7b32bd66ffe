"""Tests for the core helper modules."""

from __future__ import annotations

import hashlib
import json
from datetime import datetime

import pytest

pd = pytest.importorskip("pandas")

from memsoc.core.contracts import StepLog
from memsoc.core.io_utils import dumps_json, expand, file_hash, read_json, read_table, table_records, write_json, write_table
from memsoc.core.logging_utils import append_step_log, get_logger, now_ts
from memsoc.core.validation_utils import totals_agree


def test_expand_basic():
    assert expand("{out}/chip_{seed}.json", out="base", seed=7) == "base/chip_7.json"


def test_file_hash(tmp_path):
    file = tmp_path / "sample.txt"
    content = b"hello world"
    file.write_bytes(content)

    expected = hashlib.sha256(content).hexdigest()
    assert file_hash(str(file)) == expected


def test_write_table_creates_parent(tmp_path):
    out = tmp_path / "sub" / "trace.csv"
    write_table([{"cycle": 0, "src": 1}, {"cycle": 2, "src": 3}], out)
    assert table_records(read_table(out)) == [{"cycle": 0, "src": 1}, {"cycle": 2, "src": 3}]


def test_write_table_keeps_header_for_empty_rows(tmp_path):
    out = tmp_path / "empty.csv"
    write_table([], out, headers=["cycle", "source", "cause"])
    assert out.read_text().strip() == "cycle,source,cause"


def test_json_is_stable(tmp_path):
    data = {"b": 1, "a": [1.5, None]}
    path = tmp_path / "r" / "report.json"
    write_json(data, path)
    assert path.read_text(encoding="utf-8") == dumps_json(data)
    assert dumps_json(data).endswith("\n")
    assert read_json(path) == data


def test_json_accepts_numpy_values():
    import numpy as np

    text = dumps_json({"g": np.array([0.5, 1.0]), "n": np.int64(3), "ok": np.bool_(True)})
    assert json.loads(text) == {"g": [0.5, 1.0], "n": 3, "ok": True}
    with pytest.raises(TypeError):
        dumps_json({"x": object()})


def test_append_step_log_grows_csv(tmp_path):
    folder = tmp_path / "logs"
    append_step_log(str(folder), {"step_name": "Describe", "status": "ok"})
    path = append_step_log(str(folder), {"step_name": "Audit", "status": "error"})
    assert path == folder / "run_log.csv"
    df = pd.read_csv(path)
    assert df["step_name"].tolist() == ["Describe", "Audit"]


def test_step_log_row_is_flat():
    row = StepLog("Audit", 7, "ok", ["a", "b"], {"z": 1, "mismatches": 7}, {"description": "abc"}, {}).to_row()
    assert row["messages"] == "a | b"
    assert row["metrics"] == "mismatches=7;z=1"
    assert row["input_hashes"] == "description=abc"
    assert row["output_hashes"] == ""


def test_now_ts_parses():
    ts = now_ts()
    # Should not raise
    datetime.fromisoformat(ts)


def test_get_logger_attaches_one_handler():
    get_logger("memsoc.a")
    get_logger("memsoc.b", verbose=True)
    import logging

    root = logging.getLogger("memsoc")
    assert len(root.handlers) == 1
    assert root.level == logging.DEBUG


def test_totals_agree():
    assert totals_agree(144, 144)
    assert not totals_agree(144, 140)
    assert totals_agree(297.9, 297.90000000001)
    assert totals_agree(10, 11, tolerance=1)
