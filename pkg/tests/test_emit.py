import numpy as np
import pytest

from curvebif.emit import csv_text, fmt, json_text, svg_plot
from curvebif.util import parallel_map, thread_budget


def test_float_formatting_is_fixed_width_precision():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(1.0) == "1"
    assert fmt(-2.5e-7) == "-2.4999999999999999e-07"


def test_json_text_shapes():
    blob = json_text({"a": 1, "b": [0.5, None, True], "c": "x\"y"})
    assert blob == '{"a":1,"b":[0.5,null,true],"c":"x\\"y"}'


def test_json_text_handles_arrays_and_nonfinite():
    assert json_text(np.array([1.0, 2.0])) == "[1,2]"
    assert json_text(float("inf")) == '"inf"'
    assert json_text(float("nan")) == '"nan"'


def test_json_is_parseable_back():
    import json

    obj = {"lambda": 5.4937473164087915, "mesh": [[0.0, 1.0, -0.5]], "kind": "regular"}
    assert json.loads(json_text(obj)) == obj


def test_csv_text_roundtrip():
    txt = csv_text(("lambda", "sup_norm", "kind"), [(1.5, 2.0, "regular")])
    assert txt == "lambda,sup_norm,kind\n1.5,2,regular\n"


def test_svg_plot_is_standalone_and_deterministic():
    series = [{"x": [1, 10, 100], "y": [2.0, 4.0, 8.0], "dashed": True}]
    a = svg_plot(series, logx=True, logy=True, xlabel="lam", ylabel="u")
    b = svg_plot(series, logx=True, logy=True, xlabel="lam", ylabel="u")
    assert a == b
    assert a.startswith("<svg") and a.rstrip().endswith("</svg>")
    assert "stroke-dasharray" in a
    assert "http://www.w3.org/2000/svg" in a


def test_parallel_map_is_order_preserving(monkeypatch):
    items = list(range(20))
    monkeypatch.setenv("CURVEBIF_THREADS", "4")
    assert thread_budget() == 4
    assert parallel_map(lambda v: v * v, items) == [v * v for v in items]
    monkeypatch.setenv("CURVEBIF_THREADS", "junk")
    assert thread_budget() == 1
    assert parallel_map(lambda v: v + 1, items) == [v + 1 for v in items]
