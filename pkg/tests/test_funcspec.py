import json

import pytest
from numpy.testing import assert_allclose

from fqsl.errors import SpecError
from fqsl.funcspec import (
    ProblemSpec,
    build_function,
    function_from_json,
    resolve_depth,
    validate_function,
)
from fqsl.lattice import Lattice, constant, power, qpoch_fn

SPEC = {
    "spec_version": 1,
    "q": 0.5,
    "a": 1.0,
    "alpha": 0.6,
    "p": {"op": "add", "l": {"op": "const", "v": 1.0}, "r": {"op": "scale", "c": 0.5, "child": {"op": "x"}}},
    "r": {"op": "x"},
    "w": {"op": "qpoch", "nu": 0.4},
    "bc": [1.0, 0.0, 0.0, 1.0],
}


def test_build_matches_direct_construction(lat):
    node = {
        "op": "div",
        "l": {"op": "mul", "l": {"op": "pow", "mu": 0.3}, "r": {"op": "qpoch", "nu": 0.4}},
        "r": {"op": "add", "l": {"op": "const", "v": 2.0}, "r": {"op": "neg", "child": {"op": "x"}}},
    }
    f = build_function(validate_function(node), lat)
    g = power(lat, 0.3) * qpoch_fn(lat, 0.4) / (constant(lat, 2.0) - power(lat, 1.0))
    assert_allclose(f.values, g.values, rtol=1e-15)
    assert f.zero_limit == g.zero_limit == 0


@pytest.mark.parametrize(
    "node",
    [
        [],
        {"v": 1.0},
        {"op": "sin"},
        {"op": "const"},
        {"op": "const", "v": 1.0, "extra": 2},
        {"op": "const", "v": "one"},
        {"op": "const", "v": True},
        {"op": "const", "v": float("inf")},
        {"op": "neg", "child": {"op": "pow"}},
    ],
)
def test_invalid_function_nodes(node):
    with pytest.raises(SpecError):
        validate_function(node)


def test_invalid_json():
    with pytest.raises(SpecError):
        function_from_json("{not json")


def test_division_by_vanishing_function(lat):
    node = {"op": "div", "l": {"op": "const", "v": 1.0}, "r": {"op": "const", "v": 0.0}}
    with pytest.raises(SpecError):
        build_function(node, lat)


def test_problem_round_trip():
    spec = ProblemSpec.from_dict(SPEC)
    again = ProblemSpec.from_json(json.dumps(spec.to_dict()))
    assert again == spec
    prob = spec.to_problem()
    assert ProblemSpec.from_problem(prob) == spec
    assert_allclose(prob.p.values, 1 + 0.5 * prob.lattice.visible, rtol=1e-15)


def test_problem_edge_policy():
    spec = ProblemSpec.from_dict({**SPEC, "edge_policy": {"mode": "user_value", "value": 0.3}})
    prob = spec.to_problem()
    assert prob.edge.edge_value() == 0.3


@pytest.mark.parametrize(
    "patch",
    [
        {"spec_version": 2},
        {"q": 1.0},
        {"a": -1.0},
        {"alpha": 1.0},
        {"bc": [0, 0, 1, 0]},
        {"bc": [1, 0, 0]},
        {"depth": 0},
        {"depth": 2.5},
        {"edge_policy": {"mode": "reflect"}},
        {"edge_policy": {"mode": "user_value"}},
        {"tolerances": {"tol": -1}},
        {"tolerances": {"rtol": 1e-3}},
        {"tolerances": [1e-3]},
        {"tolerances": {"max_iter": 2.5}},
        {"lambda": "big"},
        {"colour": "blue"},
        {"w": {"op": "nope"}},
    ],
)
def test_problem_validation(patch):
    with pytest.raises(SpecError):
        ProblemSpec.from_dict({**SPEC, **patch})


def test_missing_required_field():
    d = dict(SPEC)
    del d["w"]
    with pytest.raises(SpecError, match="'w'"):
        ProblemSpec.from_dict(d)


def test_depth_precedence(monkeypatch):
    monkeypatch.delenv("QFRAC_DEPTH", raising=False)
    assert resolve_depth() is None
    monkeypatch.setenv("QFRAC_DEPTH", "30")
    assert resolve_depth() == 30
    assert resolve_depth(spec_depth=20) == 20
    assert resolve_depth(10, 20) == 10
    spec = ProblemSpec.from_dict({**SPEC, "depth": 25})
    assert spec.lattice().depth == 25
    assert spec.lattice(12).depth == 12


@pytest.mark.parametrize("value", ["abc", "0"])
def test_bad_depth_env(monkeypatch, value):
    monkeypatch.setenv("QFRAC_DEPTH", value)
    with pytest.raises(SpecError):
        resolve_depth()


def test_default_depth_matches_lattice_rule(monkeypatch):
    monkeypatch.delenv("QFRAC_DEPTH", raising=False)
    assert ProblemSpec.from_dict(SPEC).lattice().depth == Lattice(1.0, 0.5).depth
