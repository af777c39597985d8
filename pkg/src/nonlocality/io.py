"""JSON serialization for states, models, decompositions and reports.

Complex entries are written as ``[re, im]`` pairs and every float with 17
significant digits, so a value read back is bit-identical to the one written
and re-writing a loaded file reproduces it byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import DomainError, NonlocalityError, ShapeError
from .linalg import validate_density
from .locality import BehaviorTable, LhvResult, LocalModel, Scenario
from .quantum import DensityOperator, SeparableComponents


class FileFormatError(NonlocalityError, ValueError):
    """A JSON file does not describe a valid object of the expected type."""


def _number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        # JSON has no NaN/Inf; missing values are written as null
        return "null"
    return format(x, ".17g")


def _scalar(obj) -> bool:
    return obj is None or isinstance(obj, (str, bool, int, float, np.integer, np.floating, np.bool_))


def _render(obj, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if _scalar(obj):
        return _number(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_render(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if all(_scalar(v) for v in obj):
            return "[" + ", ".join(_render(v, 0) for v in obj) + "]"
        if all(isinstance(v, (list, tuple)) and all(_scalar(u) for u in v) for v in obj):
            # rows of scalars, e.g. [re, im] pairs, stay on one line
            return "[" + ", ".join(_render(v, 0) for v in obj) + "]"
        items = [f"{inner}{_render(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Render ``obj`` as JSON text with 17-significant-digit floats."""
    return _render(obj, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON ({exc})") from exc


def digest(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"matrix is not a nested array of [re, im] pairs: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise FileFormatError(f"matrix must have shape (rows, cols, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_dict(rho: DensityOperator) -> dict:
    return {"dims": [rho.dim_a, rho.dim_b], "matrix": matrix_to_json(rho.matrix)}


def state_from_dict(data, tol: float = 1e-9) -> DensityOperator:
    """Parse a state file, naming the failing residual if it is not a density matrix."""
    try:
        dims = [int(d) for d in data["dims"]]
        m = matrix_from_json(data["matrix"])
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"state file needs 'dims' and 'matrix': {exc}") from exc
    if len(dims) != 2 or m.shape != (dims[0] * dims[1],) * 2:
        raise FileFormatError(f"matrix of shape {m.shape} does not match dims {dims}")
    report = validate_density(m, tol)
    if not report.passed:
        raise FileFormatError(f"not a density operator: {report.describe()}")
    try:
        return DensityOperator(m, dims[0], dims[1])
    except (DomainError, ShapeError) as exc:
        raise FileFormatError(str(exc)) from exc


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "settings_a": s.settings_a,
        "settings_b": s.settings_b,
        "outcomes_a": s.outcomes_a,
        "outcomes_b": s.outcomes_b,
    }


def scenario_from_dict(data) -> Scenario:
    return Scenario(
        int(data["settings_a"]), int(data["settings_b"]), int(data["outcomes_a"]), int(data["outcomes_b"])
    )


def model_to_dict(model: LocalModel) -> dict:
    return {
        "scenario": scenario_to_dict(model.scenario),
        "weights": model.weights.tolist(),
        "response_a": model.response_a.tolist(),
        "response_b": model.response_b.tolist(),
    }


def model_from_dict(data) -> LocalModel:
    try:
        return LocalModel(
            scenario_from_dict(data["scenario"]),
            np.array(data["weights"], dtype=float),
            np.array(data["response_a"], dtype=float),
            np.array(data["response_b"], dtype=float),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"invalid local model: {exc}") from exc


def behavior_to_dict(b: BehaviorTable) -> dict:
    return {"scenario": scenario_to_dict(b.scenario), "p": b.p.tolist()}


def behavior_from_dict(data) -> BehaviorTable:
    try:
        return BehaviorTable(scenario_from_dict(data["scenario"]), np.array(data["p"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"invalid behavior: {exc}") from exc


def components_to_dict(c: SeparableComponents) -> dict:
    return {
        "components": [
            {"weight": w, "rhoA": state_to_dict(a), "rhoB": state_to_dict(b)}
            for w, a, b in c.components
        ]
    }


def components_from_dict(data) -> SeparableComponents:
    try:
        comps = [
            (float(item["weight"]), state_from_dict(item["rhoA"]), state_from_dict(item["rhoB"]))
            for item in data["components"]
        ]
        return SeparableComponents(tuple(comps))
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"invalid decomposition: {exc}") from exc
    except (DomainError, ShapeError) as exc:
        raise FileFormatError(str(exc)) from exc


def lhv_to_dict(r: LhvResult) -> dict:
    out = {"verdict": r.verdict, "iterations": r.iterations}
    if r.feasible:
        nz = np.flatnonzero(r.weights > 0)
        out["reconstruction_error"] = r.reconstruction_error
        out["strategy_weights"] = {str(int(i)): float(r.weights[i]) for i in nz}
    else:
        out["dual"] = r.dual.tolist()
        out["bound"] = r.bound
        out["gap"] = r.gap
    return out
