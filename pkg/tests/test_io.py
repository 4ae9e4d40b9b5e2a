import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rootflow.errors import ConfigError
from rootflow.io import (
    load_measure,
    read_complex_csv,
    read_numeric_column,
    read_state_csv,
    write_complex_csv,
    write_json,
    write_real_roots_csv,
    write_residual_csv,
    write_state_csv,
)
from rootflow.measures import Dirac, PowerLaw, measure_to_json
from rootflow.radial_dynamics import evolve, from_radii


def test_state_round_trip_is_exact(tmp_path):
    s, _ = evolve(from_radii([0.5, 0.9, 1.7], 64), 70)
    path = tmp_path / "state.csv"
    write_state_csv(path, s)
    back = read_state_csv(path)
    np.testing.assert_array_equal(back.log_roots, s.log_roots)
    assert (back.m, back.q, back.deriv_count) == (s.m, s.q, s.deriv_count)


def test_state_file_layout(tmp_path):
    path = tmp_path / "state.csv"
    write_state_csv(path, from_radii([1.0, 2.0], 3))
    lines = path.read_text().splitlines()
    assert lines[0] == "# n=2,m=3,q=0,deriv_count=0"
    assert lines[1] == "j,log_root,radius"
    assert lines[2] == "1,0.0,1.0"


def test_state_row_count_mismatch(tmp_path):
    path = tmp_path / "state.csv"
    write_state_csv(path, from_radii([1.0, 2.0], 3))
    path.write_text(path.read_text().replace("# n=2", "# n=3"))
    with pytest.raises(ConfigError):
        read_state_csv(path)


@given(arrays(np.complex128, st.integers(1, 20), elements=st.complex_numbers(max_magnitude=1e6, allow_nan=False)))
@settings(max_examples=40)
def test_complex_round_trip(tmp_path_factory, z):
    path = tmp_path_factory.mktemp("c") / "z.csv"
    write_complex_csv(path, z)
    np.testing.assert_array_equal(read_complex_csv(path), z)


def test_writers_are_byte_stable(tmp_path):
    z = np.exp(1j * np.linspace(0, 3, 7)) / 3
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_complex_csv(a, z)
    write_complex_csv(b, z.copy())
    assert a.read_bytes() == b.read_bytes()


def test_real_roots_grouped_by_multiplicity(tmp_path):
    path = tmp_path / "r.csv"
    write_real_roots_csv(path, [0.5, -1.0, 0.5, 0.5])
    assert path.read_text().splitlines() == ["index,root,multiplicity", "1,-1.0,1", "2,0.5,3"]


def test_residual_rows(tmp_path):
    path = tmp_path / "res.csv"
    write_residual_csv(path, [(0.25, 0.1, 1e-12)])
    assert path.read_text().splitlines() == ["t,x,residual", "0.25,0.1,1e-12"]


def test_write_json_sorted_with_newline(tmp_path):
    path = tmp_path / "doc.json"
    write_json(path, {"b": 1, "a": [1.5]})
    text = path.read_text()
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')


def test_load_measure(tmp_path):
    path = tmp_path / "mu.json"
    path.write_text(json.dumps(measure_to_json(PowerLaw(2.0))))
    mu = load_measure(path)
    assert mu.quantile(0.25) == pytest.approx(0.5)
    path.write_text(json.dumps(measure_to_json(Dirac(1.5))))
    assert load_measure(path).quantile(0.7) == 1.5


def test_load_measure_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_measure(tmp_path / "nope.json")


class TestNumericColumn:
    def test_named_column_preferred(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("j,radius,other\n1,0.5,9\n2,0.75,9\n")
        np.testing.assert_array_equal(read_numeric_column(path), [0.5, 0.75])

    def test_state_file(self, tmp_path):
        path = tmp_path / "state.csv"
        write_state_csv(path, from_radii([0.5, 2.0], 4))
        np.testing.assert_array_equal(read_numeric_column(path), [0.5, 2.0])

    def test_complex_file_gives_moduli(self, tmp_path):
        path = tmp_path / "z.csv"
        write_complex_csv(path, [3 + 4j, -1j])
        np.testing.assert_allclose(read_numeric_column(path), [5.0, 1.0])

    def test_headerless_uses_last_column(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("# comment\n1,2\n3,4\n")
        np.testing.assert_array_equal(read_numeric_column(path), [2.0, 4.0])

    def test_unknown_header_uses_last_column(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("a,b\n1,2\n")
        np.testing.assert_array_equal(read_numeric_column(path), [2.0])

    @pytest.mark.parametrize("text", ["", "# only a comment\n", "radius\n", "radius\nabc\n"])
    def test_bad_files(self, tmp_path, text):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        with pytest.raises(ConfigError):
            read_numeric_column(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            read_numeric_column(tmp_path / "missing.csv")
