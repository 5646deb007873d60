"""Declarative JSON descriptions of lattice functions and problems.

A function is a tree of nodes, each a JSON object with an ``op`` key:

    {"op": "const", "v": 2.0}
    {"op": "x"}
    {"op": "pow", "mu": 0.3}                      x^mu
    {"op": "qpoch", "nu": 0.4}                    (qx; q)_nu
    {"op": "neg", "child": F}
    {"op": "add" | "mul" | "div", "l": F, "r": F}
    {"op": "scale", "c": 2.0, "child": F}

Trees are built directly into extended-precision lattice functions with
exact tails. See docs/problem_spec.md for the problem schema.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

from .errors import SpecError
from .lattice import Lattice, LatticeFn, constant, power, qpoch_fn
from .qfrac import RightEdgePolicy
from .qfslp import SLProblem

SPEC_VERSION = 1
DEPTH_ENV = "QFRAC_DEPTH"

_FIELDS = {
    "const": {"v"},
    "x": set(),
    "pow": {"mu"},
    "qpoch": {"nu"},
    "neg": {"child"},
    "add": {"l", "r"},
    "mul": {"l", "r"},
    "div": {"l", "r"},
    "scale": {"c", "child"},
}
_NUMERIC = {"v", "mu", "nu", "c"}
_MAX_NODES = 10_000


def _number(node, key):
    if key not in node:
        raise SpecError(f"missing numeric field {key!r}")
    v = node[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SpecError(f"'{key}' must be a finite number, got {v!r}")
    return float(v)


def validate_function(node, _count=None) -> dict:
    """Check a function tree; returns it unchanged or raises SpecError."""
    count = _count if _count is not None else [0]
    count[0] += 1
    if count[0] > _MAX_NODES:
        raise SpecError("function tree is too large")
    if not isinstance(node, dict) or "op" not in node:
        raise SpecError(f"function node must be an object with an 'op' key, got {node!r}")
    op = node["op"]
    if op not in _FIELDS:
        raise SpecError(f"unknown function node {op!r}; expected one of {sorted(_FIELDS)}")
    keys = set(node) - {"op"}
    if keys != _FIELDS[op]:
        raise SpecError(f"node {op!r} needs fields {sorted(_FIELDS[op])}, got {sorted(keys)}")
    for key in keys & _NUMERIC:
        _number(node, key)
    for key in keys & {"child", "l", "r"}:
        validate_function(node[key], count)
    return node


def build_function(node: dict, lattice: Lattice) -> LatticeFn:
    """Lattice function for a validated tree."""
    op = node["op"]
    if op == "const":
        return constant(lattice, float(node["v"]))
    if op == "x":
        return power(lattice, 1.0)
    if op == "pow":
        return power(lattice, float(node["mu"]))
    if op == "qpoch":
        return qpoch_fn(lattice, float(node["nu"]))
    if op == "neg":
        return -build_function(node["child"], lattice)
    if op == "scale":
        return build_function(node["child"], lattice) * float(node["c"])
    left, right = build_function(node["l"], lattice), build_function(node["r"], lattice)
    if op == "add":
        return left + right
    if op == "mul":
        return left * right
    try:
        return left / right
    except ZeroDivisionError as exc:
        raise SpecError(f"division by a function that vanishes: {exc}") from exc


def function_from_json(text: str) -> dict:
    try:
        node = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from exc
    return validate_function(node)


def resolve_depth(flag: int | None = None, spec_depth: int | None = None) -> int | None:
    """Depth precedence: command-line flag, then the spec file, then QFRAC_DEPTH, then the default."""
    for v in (flag, spec_depth):
        if v is not None:
            return int(v)
    env = os.environ.get(DEPTH_ENV)
    if env:
        try:
            d = int(env)
        except ValueError as exc:
            raise SpecError(f"{DEPTH_ENV} must be an integer, got {env!r}") from exc
        if d < 1:
            raise SpecError(f"{DEPTH_ENV} must be positive")
        return d
    return None


@dataclass
class ProblemSpec:
    q: float
    a: float
    alpha: float
    p: dict
    r: dict
    w: dict
    bc: list
    depth: int | None = None
    edge_policy: dict = field(default_factory=lambda: {"mode": "zero_extension"})
    lam: float | None = None
    tolerances: dict = field(default_factory=lambda: {"tol": 1e-11, "max_iter": 200})
    spec_version: int = SPEC_VERSION

    @classmethod
    def from_dict(cls, d) -> "ProblemSpec":
        if not isinstance(d, dict):
            raise SpecError("problem spec must be a JSON object")
        known = {
            "spec_version", "q", "a", "depth", "alpha", "p", "r", "w", "bc",
            "edge_policy", "lambda", "tolerances",
        }
        extra = set(d) - known
        if extra:
            raise SpecError(f"unknown fields in problem spec: {sorted(extra)}")
        if d.get("spec_version") != SPEC_VERSION:
            raise SpecError(f"spec_version must be {SPEC_VERSION}")
        for key in ("q", "a", "alpha", "p", "r", "w", "bc"):
            if key not in d:
                raise SpecError(f"missing required field {key!r}")
        q, a, alpha = (_number(d, k) for k in ("q", "a", "alpha"))
        if not 0 < q < 1:
            raise SpecError("q must lie in (0, 1)")
        if a <= 0:
            raise SpecError("a must be positive")
        if not 0 < alpha < 1:
            raise SpecError("alpha must lie in (0, 1)")
        depth = d.get("depth")
        if depth is not None and (isinstance(depth, bool) or not isinstance(depth, int) or depth < 1):
            raise SpecError("depth must be a positive integer")
        for key in ("p", "r", "w"):
            validate_function(d[key])
        bc = d["bc"]
        if not (isinstance(bc, list) and len(bc) == 4):
            raise SpecError("bc must be a list [c1, c2, d1, d2]")
        bc = [_number({"bc": v}, "bc") for v in bc]
        if bc[0] == 0 and bc[1] == 0 or bc[2] == 0 and bc[3] == 0:
            raise SpecError("bc needs c1^2 + c2^2 != 0 and d1^2 + d2^2 != 0")
        edge = d.get("edge_policy", {"mode": "zero_extension"})
        if not isinstance(edge, dict) or edge.get("mode") not in ("zero_extension", "user_value"):
            raise SpecError("edge_policy.mode must be zero_extension or user_value")
        if edge["mode"] == "user_value":
            _number(edge, "value")
        lam = d.get("lambda")
        if lam is not None:
            lam = _number(d, "lambda")
        given = d.get("tolerances") or {}
        if not isinstance(given, dict):
            raise SpecError("tolerances must be an object")
        tol = {"tol": 1e-11, "max_iter": 200}
        tol.update(given)
        if set(tol) - {"tol", "max_iter"}:
            raise SpecError("tolerances accepts only tol and max_iter")
        if _number(tol, "tol") <= 0 or not isinstance(tol["max_iter"], int) or tol["max_iter"] < 1:
            raise SpecError("tolerances need tol > 0 and a positive integer max_iter")
        return cls(q, a, alpha, d["p"], d["r"], d["w"], bc, depth, dict(edge), lam, tol)

    @classmethod
    def from_json(cls, text: str) -> "ProblemSpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        out = {
            "spec_version": self.spec_version,
            "q": self.q,
            "a": self.a,
            "alpha": self.alpha,
            "p": self.p,
            "r": self.r,
            "w": self.w,
            "bc": list(self.bc),
            "edge_policy": dict(self.edge_policy),
            "tolerances": dict(self.tolerances),
        }
        if self.depth is not None:
            out["depth"] = self.depth
        if self.lam is not None:
            out["lambda"] = self.lam
        return out

    def lattice(self, depth_flag: int | None = None) -> Lattice:
        return Lattice(self.a, self.q, resolve_depth(depth_flag, self.depth))

    def edge(self) -> RightEdgePolicy:
        return RightEdgePolicy(self.edge_policy["mode"], self.edge_policy.get("value"))

    def to_problem(self, depth_flag: int | None = None) -> SLProblem:
        lat = self.lattice(depth_flag)
        p, r, w = (build_function(getattr(self, k), lat) for k in ("p", "r", "w"))
        prob = SLProblem(lat, self.alpha, p, r, w, tuple(self.bc), self.edge())
        prob.__dict__["source_spec"] = self
        return prob

    @classmethod
    def from_problem(cls, prob: SLProblem) -> "ProblemSpec":
        """Re-serialize a problem that was built from a spec."""
        src = prob.__dict__.get("source_spec")
        if src is None:
            raise SpecError("problem was not built from a spec; coefficient trees are unknown")
        lat = prob.lattice
        edge = {"mode": prob.edge.mode}
        if prob.edge.mode == "user_value":
            edge["value"] = prob.edge.value
        return cls(
            lat.q, lat.a, prob.alpha, src.p, src.r, src.w, list(prob.bc),
            src.depth, edge, src.lam, dict(src.tolerances),
        )
