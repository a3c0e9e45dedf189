import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirichlet_ops import PreconditionError, TailBound, TruncatedDirichletSeries
from dirichlet_ops import io
from dirichlet_ops.symbols import Symbol, builtin_symbol

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("text,want", [
    ("2", 2), ("2+0i", 2), ("3i", 3j), ("-i", -1j), ("i", 1j), ("1e-3+2i", 1e-3 + 2j),
    ("0.5-0.25j", 0.5 - 0.25j), (" 1 + 1i ", 1 + 1j), (".5i", 0.5j),
])
def test_parse_complex(text, want):
    assert io.parse_complex(text) == want


@pytest.mark.parametrize("text", ["", "2+xi", "abc", "1+2", "i2", "1++2i", "nan"])
def test_parse_complex_rejects(text):
    with pytest.raises(PreconditionError):
        io.parse_complex(text)


@given(finite, finite)
def test_complex_format_roundtrip(a, b):
    z = complex(a, b)
    assert io.parse_complex(io.format_complex(z)) == z


@pytest.mark.parametrize("text,want", [
    ("pi", math.pi), ("pi/2", math.pi / 2), ("log(3)", math.log(3)), ("-2**3", -8.0), ("sqrt(2)*e", math.sqrt(2) * math.e),
])
def test_parse_real_expr(text, want):
    assert io.parse_real_expr(text) == pytest.approx(want)


@pytest.mark.parametrize("text", ["__import__('os')", "x", "log(0)", "1/0", "[1]", "pi("])
def test_parse_real_expr_rejects(text):
    with pytest.raises(PreconditionError):
        io.parse_real_expr(text)


def test_series_roundtrip():
    f = TruncatedDirichletSeries([1, 2, 7], [1.0, -0.5j, 2 + 1j], 10, TailBound(0.25, 1.5))
    g = io.series_from_json(json.loads(json.dumps(io.series_to_json(f))))
    assert g.as_dict() == f.as_dict() and g.truncation == 10 and g.tail == f.tail
    e = TruncatedDirichletSeries.from_mapping({3: 1.0})
    assert io.series_from_json(io.series_to_json(e)).is_exact


def test_series_json_rejects_malformed():
    with pytest.raises(PreconditionError):
        io.series_from_json({"coeffs": [[1.5, 1.0]]})
    with pytest.raises(PreconditionError):
        io.series_from_json({"nothing": []})
    with pytest.raises(PreconditionError):
        io.series_from_json({"coeffs": [[1, 1.0]], "tail": {"kind": "mystery"}})


@pytest.mark.parametrize("name", ["shift1", "shift1_plus_2s", "example1_not_GA", "example2_GA_not_UC",
                                  "prop_algebrab_F"])
def test_symbol_roundtrip(name):
    sym = builtin_symbol(name)
    back = io.symbol_from_json(json.loads(io.dumps(io.symbol_to_json(sym))))
    s = np.array([0.3 + 1j, 1.0, 2 - 5j])
    assert back.characteristic == sym.characteristic
    assert np.allclose(back(s), sym(s), rtol=1e-14, atol=1e-14)


def test_symbol_builtin_reference():
    assert io.symbol_from_json({"builtin": "shift1"})(2.0) == pytest.approx(3.0)
    with pytest.raises(PreconditionError):
        io.symbol_from_json({"characteristic": 1, "part": {"type": "strange"}})


def test_load_series_forms(tmp_path):
    p = tmp_path / "f.json"
    p.write_text(json.dumps(io.series_to_json(TruncatedDirichletSeries.dense(np.ones(5)))))
    assert io.load_series(str(p)).nnz == 5
    assert io.load_series('{"coeffs": [[2, 1.0, 0.0]]}').as_dict() == {2: 1}
    z = io.load_series("zeta:100")
    assert z.nnz == 100 and z.tail is not None
    assert io.load_series("algebrab").as_dict() == {2: 0.5, 3: -0.5}
    for bad in ("zeta:1", "zeta:x", "nowhere", "{bad json"):
        with pytest.raises(PreconditionError):
            io.load_series(bad)


def test_load_symbol_forms():
    assert isinstance(io.load_symbol("identity"), Symbol)
    js = json.dumps(io.symbol_to_json(builtin_symbol("shift1")))
    assert io.load_symbol(js)(1.0) == pytest.approx(2.0)


def test_dumps_special_values():
    out = json.loads(io.dumps({"z": 1 + 2j, "inf": math.inf, "nan": math.nan, "arr": np.arange(2),
                               "b": np.bool_(True)}))
    assert out == {"z": [1.0, 2.0], "inf": "inf", "nan": None, "arr": [0, 1], "b": True}


def test_write_csv_exact_floats(tmp_path):
    p = tmp_path / "t.csv"
    io.write_csv(str(p), ("a", "b"), [(0.1, "x"), (1 / 3, 2)])
    lines = p.read_text().splitlines()
    assert lines[0] == "a,b"
    assert float(lines[2].split(",")[0]) == 1 / 3
