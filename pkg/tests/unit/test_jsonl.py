import json

import numpy as np
import pytest

from best_of_many.data import gen_fork, load_jsonl, write_jsonl
from best_of_many.exceptions import IoError, ParseError, SchemaError
from best_of_many.validation import ForkSpec

RECORD = {"obs": [[1.0, 0.0], [1.0, 0.0]], "fut": [[0.5, 0.5]]}


def write_lines(path, *lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestLoadJsonl:
    """Test cases for reading trajectory datasets."""

    def test_empty_file(self, tmp_path):
        """Test that an empty file is an empty dataset."""
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")

        assert len(load_jsonl(path)) == 0

    def test_blank_lines_skipped(self, tmp_path):
        """Test that blank lines are ignored."""
        line = json.dumps(RECORD)
        path = write_lines(tmp_path / "d.jsonl", line, "", line)

        ds = load_jsonl(path)

        assert len(ds) == 2
        assert ds.obs.shape == (2, 2, 2)
        assert ds.meta == [{}, {}]

    def test_parse_error_line(self, tmp_path):
        """Test that malformed JSON reports its 1-based line."""
        line = json.dumps(RECORD)
        path = write_lines(tmp_path / "d.jsonl", line, line, "{oops")

        with pytest.raises(ParseError) as exc_info:
            load_jsonl(path)

        assert exc_info.value.line == 3
        assert exc_info.value.details["line"] == 3

    def test_non_object_line(self, tmp_path):
        """Test that a JSON array is not a record."""
        path = write_lines(tmp_path / "d.jsonl", "[1, 2]")

        with pytest.raises(ParseError):
            load_jsonl(path)

    def test_missing_field(self, tmp_path):
        """Test that a record without fut names the missing field."""
        path = write_lines(tmp_path / "d.jsonl", json.dumps({"obs": [[0.0, 0.0]]}))

        with pytest.raises(SchemaError) as exc_info:
            load_jsonl(path)

        assert exc_info.value.missing == ["fut"]
        assert exc_info.value.line == 1

    def test_inconsistent_lengths(self, tmp_path):
        """Test that records must share sequence lengths."""
        short = {"obs": [[1.0, 0.0]], "fut": [[0.5, 0.5]]}
        path = write_lines(tmp_path / "d.jsonl", json.dumps(RECORD), json.dumps(short))

        with pytest.raises(SchemaError) as exc_info:
            load_jsonl(path)

        assert exc_info.value.line == 2

    def test_non_finite_values(self, tmp_path):
        """Test that NaN coordinates are rejected."""
        line = '{"obs": [[NaN, 0.0]], "fut": [[0.0, 0.0]]}'
        path = write_lines(tmp_path / "d.jsonl", line)

        with pytest.raises(SchemaError):
            load_jsonl(path)

    def test_wrong_point_width(self, tmp_path):
        """Test that points must have two coordinates."""
        line = json.dumps({"obs": [[1.0]], "fut": [[0.0, 0.0]]})
        path = write_lines(tmp_path / "d.jsonl", line)

        with pytest.raises(SchemaError):
            load_jsonl(path)

    def test_missing_file(self, tmp_path):
        """Test that an unreadable path raises IoError."""
        with pytest.raises(IoError):
            load_jsonl(tmp_path / "absent.jsonl")


class TestWriteJsonl:
    """Test cases for writing trajectory datasets."""

    def test_round_trip(self, tmp_path):
        """Test that written datasets load back exactly."""
        ds = gen_fork(ForkSpec(t_obs=3, t_fut=4), 5, seed=0)
        path = tmp_path / "fork.jsonl"

        write_jsonl(ds, path)
        loaded = load_jsonl(path)

        assert loaded.equals(ds)
        np.testing.assert_array_equal(loaded.fut, ds.fut)

    def test_unwritable_path(self, tmp_path):
        """Test that a missing directory raises IoError."""
        ds = gen_fork(ForkSpec(t_obs=3, t_fut=4), 1, seed=0)

        with pytest.raises(IoError):
            write_jsonl(ds, tmp_path / "missing" / "fork.jsonl")
