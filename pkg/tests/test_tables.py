import numpy as np
import pytest
from hypothesis import given, strategies as st

from nlplasmon.errors import DomainError
from nlplasmon.tables import SweepTable, format_number


@given(st.lists(st.floats(-1e300, 1e300, allow_nan=False), min_size=1, max_size=30))
def test_round_trip_is_exact(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("t") / "x.tsv"
    x = np.arange(len(values), dtype=float)
    t = SweepTable(("x", "y"), x, np.array(values))
    t.write(path)
    back = SweepTable.read(path)
    assert back.columns == ("x", "y")
    assert np.array_equal(back.column("y"), t.column("y"))


def test_bytes_are_deterministic(tmp_path):
    t = SweepTable(("w", "a", "b"), [0.1, 0.2], [[1 / 3, 2.0], [np.pi, -1e-300]])
    t.write(tmp_path / "a.tsv")
    t.write(tmp_path / "b.tsv")
    raw = (tmp_path / "a.tsv").read_bytes()
    assert raw == (tmp_path / "b.tsv").read_bytes()
    assert raw.startswith(b"#w\ta\tb\n") and b"\r" not in raw
    assert format_number(1 / 3) == "0.33333333333333331"


def test_validation():
    with pytest.raises(DomainError):
        SweepTable(("x", "y"), [1.0, 0.5], [1.0, 2.0])
    with pytest.raises(DomainError):
        SweepTable(("x", "y"), [1.0, 2.0], [1.0, np.nan])
    with pytest.raises(DomainError):
        SweepTable(("x",), [1.0], [1.0])
