import numpy as np
import pytest

from recdiag.errors import MissingResponse, ParseError, RankDeficient
from recdiag.io import fmt, load_bundled, load_csv, parse_cell, read_csv_table, write_csv


@pytest.mark.parametrize("name, n, p", [("alcohol_tobacco", 11, 2), ("smoking_cancer", 44, 5)])
def test_bundled_shapes(name, n, p):
    data = load_bundled(name)
    assert (data.n, data.p) == (n, p)
    assert data.has_intercept
    assert len(set(data.row_ids)) == n


def test_bundled_ids():
    assert load_bundled("alcohol_tobacco").row_ids[-1] == "Northern Ireland"
    assert {"NE", "DC"} <= set(load_bundled("smoking_cancer").row_ids)


def test_small_round_trip(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("id,y,x\na,1.5,0\nb,2.25,1\nc,3.125,2.5\n")
    data = load_csv(path, "y", id_column="id")
    assert data.row_ids == ("a", "b", "c") or list(data.row_ids) == ["a", "b", "c"]
    np.testing.assert_array_equal(data.y, [1.5, 2.25, 3.125])
    np.testing.assert_array_equal(data.X, [[1, 0], [1, 1], [1, 2.5]])

    out = tmp_path / "o.csv"
    write_csv(out, ["id", *data.labels, "y"],
              [[rid, *row, yy] for rid, row, yy in zip(data.row_ids, data.X, data.y)])
    again = load_csv(out, "y", id_column="id", intercept=False)
    np.testing.assert_array_equal(again.X, data.X)
    np.testing.assert_array_equal(again.y, data.y)


def test_parse_error_location(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("y,x\n1,2\n3,oops\n")
    with pytest.raises(ParseError) as err:
        load_csv(path, "y")
    assert err.value.row == 3 and err.value.col == "x"
    assert err.value.exit_code == 2


@pytest.mark.parametrize("body", ["y,x\n1,2\n3\n", "", "y,x\n", "y,y\n1,2\n", "y,x\n1,inf\n"])
def test_malformed_inputs(tmp_path, body):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(ParseError):
        load_csv(path, "y")


def test_missing_response(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(MissingResponse):
        load_csv(path, "y")


def test_duplicate_predictor_is_rank_deficient(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("y,a,b\n1,1,1\n2,2,2\n4,3,3\n3,4,4\n")
    with pytest.raises(RankDeficient):
        load_csv(path, "y")


@pytest.mark.parametrize("value", [0.1, 1 / 3, -2.5e-300, 1e308, np.pi, 5e-324])
def test_float_format_round_trips(value):
    assert parse_cell(fmt(value)) == value


def test_nan_is_empty():
    assert fmt(float("nan")) == "" and np.isnan(parse_cell(""))
    assert fmt(True) == "1" and fmt(np.int64(4)) == "4"


def test_table_reader(tmp_path):
    write_csv(tmp_path / "t.csv", ["a", "b"], [[1.0, float("nan")], ["x", 2]])
    header, rows = read_csv_table(tmp_path / "t.csv")
    assert header == ["a", "b"] and rows == [["1", ""], ["x", "2"]]
