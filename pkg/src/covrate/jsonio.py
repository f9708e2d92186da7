"""JSON schemas for matrices, models, networks, and allocations.

All matrices travel as ``{"n": <order>, "rows": [[...], ...]}`` with plain
floats (serialized by shortest round-trip repr, so values survive a dump/load
cycle bit-exactly).  Model files may omit the side-information blocks, which
is read as "no side information" (``n_z = 0``).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DimensionMismatch, InvalidParam
from .fusion import Allocation, FusionNetwork, SensorNode
from .model import JointGaussianModel


def matrix_to_json(A: np.ndarray) -> dict[str, Any]:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    return {"n": A.shape[0], "rows": [[float(v) for v in row] for row in A]}


def matrix_from_json(obj: Any) -> np.ndarray:
    if not isinstance(obj, dict) or "rows" not in obj:
        raise InvalidParam("matrix object must be a dict with a 'rows' field")
    A = np.asarray(obj["rows"], dtype=float)
    if A.ndim != 2:
        raise InvalidParam("matrix 'rows' must be a list of equal-length lists")
    n = int(obj.get("n", A.shape[0]))
    if A.shape != (n, n):
        raise DimensionMismatch(f"matrix claims order {n} but rows have shape {A.shape}")
    return A


def _rect_from_json(obj: Any, shape: tuple[int, int], name: str) -> np.ndarray:
    A = np.asarray(obj["rows"] if isinstance(obj, dict) else obj, dtype=float)
    if A.ndim != 2 or A.shape != shape:
        raise DimensionMismatch(f"{name} must have shape {shape}, got {A.shape}")
    return A


def rect_to_json(A: np.ndarray) -> dict[str, Any]:
    """Serialize a (possibly non-square) matrix as a rows-only document."""
    return {"rows": [[float(v) for v in row] for row in np.asarray(A, dtype=float)]}


def model_to_json(model: JointGaussianModel) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "n_x": model.n_x,
        "n_y": model.n_y,
        "n_z": model.n_z,
        "Sigma_x": matrix_to_json(model.Sigma_x),
        "Sigma_y": matrix_to_json(model.Sigma_y),
        "Sigma_xy": rect_to_json(model.Sigma_xy),
    }
    if model.n_z:
        doc["Sigma_z"] = matrix_to_json(model.Sigma_z)
        doc["Sigma_xz"] = rect_to_json(model.Sigma_xz)
        doc["Sigma_yz"] = rect_to_json(model.Sigma_yz)
    return doc


def model_from_json(obj: Any) -> JointGaussianModel:
    if not isinstance(obj, dict):
        raise InvalidParam("model document must be a JSON object")
    for key in ("Sigma_x", "Sigma_y", "Sigma_xy"):
        if key not in obj:
            raise InvalidParam(f"model document is missing {key!r}")
    Sigma_x = matrix_from_json(obj["Sigma_x"])
    Sigma_y = matrix_from_json(obj["Sigma_y"])
    n_x = int(obj.get("n_x", Sigma_x.shape[0]))
    n_y = int(obj.get("n_y", Sigma_y.shape[0]))
    has_z = "Sigma_z" in obj
    n_z = int(obj.get("n_z", matrix_from_json(obj["Sigma_z"]).shape[0] if has_z else 0))
    if n_z and not has_z:
        raise InvalidParam("model claims n_z > 0 but has no Sigma_z block")
    Sigma_z = matrix_from_json(obj["Sigma_z"]) if n_z else np.zeros((0, 0))
    return JointGaussianModel(
        Sigma_x=Sigma_x,
        Sigma_y=Sigma_y,
        Sigma_z=Sigma_z,
        Sigma_xy=_rect_from_json(obj["Sigma_xy"], (n_x, n_y), "Sigma_xy"),
        Sigma_xz=_rect_from_json(obj["Sigma_xz"], (n_x, n_z), "Sigma_xz")
        if n_z
        else np.zeros((n_x, 0)),
        Sigma_yz=_rect_from_json(obj["Sigma_yz"], (n_y, n_z), "Sigma_yz")
        if n_z
        else np.zeros((n_y, 0)),
    )


def network_to_json(network: FusionNetwork) -> dict[str, Any]:
    return {
        "n": network.n,
        "Sigma_xd": matrix_to_json(network.Sigma_xd),
        "R_nats": float(network.R),
        "nodes": [
            {
                "W": matrix_to_json(node.W),
                "Sigma_n": matrix_to_json(node.Sigma_n),
                "alpha": float(node.alpha),
            }
            for node in network.nodes
        ],
    }


def network_from_json(obj: Any) -> FusionNetwork:
    if not isinstance(obj, dict):
        raise InvalidParam("network document must be a JSON object")
    for key in ("Sigma_xd", "R_nats", "nodes"):
        if key not in obj:
            raise InvalidParam(f"network document is missing {key!r}")
    nodes = tuple(
        SensorNode(
            W=matrix_from_json(nd["W"]),
            Sigma_n=matrix_from_json(nd["Sigma_n"]),
            alpha=float(nd["alpha"]),
        )
        for nd in obj["nodes"]
    )
    return FusionNetwork(
        Sigma_xd=matrix_from_json(obj["Sigma_xd"]),
        nodes=nodes,
        R=float(obj["R_nats"]),
    )


def allocation_to_json(alloc: Allocation) -> dict[str, Any]:
    return {"D": [matrix_to_json(Di) for Di in alloc.D]}


def allocation_from_json(obj: Any) -> Allocation:
    if not isinstance(obj, dict) or "D" not in obj:
        raise InvalidParam("allocation document must be a JSON object with a 'D' list")
    return Allocation(D=tuple(matrix_from_json(Di) for Di in obj["D"]))


def load_json(path: str | Path) -> Any:
    with Path(path).open() as fh:
        return json.load(fh)


def dump_json(doc: Any, path: str | Path) -> None:
    with Path(path).open("w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
