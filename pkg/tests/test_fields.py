import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from gsh.errors import BoxError, ValidationError
from gsh.fields import CoefficientField, SampledFunction, dump_json, load_field, load_json, save_field

finite = st.floats(allow_nan=False, allow_infinity=False)
shapes = hnp.array_shapes(min_dims=1, max_dims=3, min_side=1, max_side=5)


@given(hnp.arrays(np.float64, shapes, elements=finite), st.sampled_from(["test", "dual"]))
def test_json_round_trip_bit_exact(re, kind):
    a = CoefficientField(re + 1j * np.flip(re), kind)
    back = CoefficientField.from_json(json.loads(dump_json(a.to_json())))
    assert back.kind == kind
    assert back.data.tobytes() == a.data.tobytes()


def test_file_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    a = CoefficientField(rng.standard_normal((3, 4)) * 1e-300 + 1j * rng.standard_normal((3, 4)) * 1e300, "dual")
    save_field(a, tmp_path / "a.json")
    b = load_field(tmp_path / "a.json")
    assert b.data.tobytes() == a.data.tobytes() and b.kind == "dual"
    assert (tmp_path / "a.json").read_text() == dump_json(b.to_json())


def test_file_layout():
    doc = CoefficientField(np.array([[1, 2j]]), "dual").to_json()
    assert doc == {"dim": 2, "box": [1, 2], "kind": "dual", "data": [[1.0, 0.0], [0.0, 2.0]]}


def test_read_only():
    a = CoefficientField(np.ones(3))
    with pytest.raises(ValueError):
        a.data[0] = 2


@pytest.mark.parametrize(
    "data, kind",
    [(np.zeros((1, 1, 1, 1)), "test"), (np.array([np.inf]), "test"), (np.ones(2), "both"), (np.zeros(0), "test")],
)
def test_invalid_fields(data, kind):
    with pytest.raises(ValidationError):
        CoefficientField(data, kind)


@pytest.mark.parametrize(
    "doc",
    [
        {"box": [2], "data": [[1, 0]]},
        {"box": [2], "dim": 2, "data": [[1, 0], [2, 0]]},
        {"box": [2], "data": [1, 2]},
        {"data": [[1, 0]]},
    ],
)
def test_malformed_json(doc):
    with pytest.raises(ValidationError):
        CoefficientField.from_json(doc)


def test_load_errors(tmp_path):
    with pytest.raises(ValidationError):
        load_json(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{oops")
    with pytest.raises(ValidationError):
        load_json(tmp_path / "bad.json")


def test_pad_truncate_add():
    a = CoefficientField(np.array([1.0, 2.0]))
    b = CoefficientField(np.array([10.0, 20.0, 30.0]))
    np.testing.assert_array_equal((a + b).data, [11, 22, 30])
    np.testing.assert_array_equal(a.padded((4,)).data, [1, 2, 0, 0])
    np.testing.assert_array_equal(b.truncated((1,)).data, [10])
    with pytest.raises(BoxError):
        b.padded((2,))
    np.testing.assert_array_equal((2 * a).data, [2, 4])


def test_unit_and_total_order():
    e = CoefficientField.unit((2, 3), (1, 2))
    assert e.data[1, 2] == 1 and np.sum(np.abs(e.data)) == 1
    np.testing.assert_array_equal(e.total_order(), [[0, 1, 2], [1, 2, 3]])


def test_sampled_function_round_trip():
    f = SampledFunction((np.linspace(-1, 1, 3), np.array([0.0, 0.5])), np.arange(6.0).reshape(3, 2) * (1 + 1j))
    back = SampledFunction.from_json(json.loads(dump_json(f.to_json())))
    assert back.values.tobytes() == f.values.tobytes()
    assert all(g1.tobytes() == g2.tobytes() for g1, g2 in zip(back.grids, f.grids))


def test_sampled_function_accepts_real_values():
    f = SampledFunction.from_json({"grids": [[0, 1, 2]], "values": [1.0, 2.0, 3.0]})
    np.testing.assert_array_equal(f.values, [1, 2, 3])


def test_sampled_function_rejects_bad_grids():
    with pytest.raises(ValidationError):
        SampledFunction((np.array([0.0, 0.0]),), np.zeros(2))
    with pytest.raises(ValidationError):
        SampledFunction((np.array([0.0, 1.0]),), np.zeros(3))
