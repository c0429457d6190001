"""Checkpoint files.

A checkpoint is a JSON document::

    {
      "format": "ml-msda-checkpoint",
      "version": 1,
      "arch": {...ArchConfig...},
      "metadata": {...},
      "parameters": [{"name": ..., "shape": [...], "data": "<base64 of little-endian f8>"}, ...],
      "optimizer": null | {"epoch": int, "step": int, "velocity": [same layout as parameters]}
    }

Parameters appear in declaration order. Keys are sorted and indented so that loading a
checkpoint and saving it again reproduces the file byte for byte.
"""
import base64
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import ValidationError

from ..errors import CheckpointError
from ..utils.validators import ArchConfig
from .network import MlMsdaModel, init_model

CHECKPOINT_FORMAT = "ml-msda-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class Checkpoint:
    model: MlMsdaModel
    metadata: dict[str, Any] = field(default_factory=dict)
    optimizer: Optional[dict[str, Any]] = None


def _encode(name: str, array: np.ndarray) -> dict[str, Any]:
    data = np.ascontiguousarray(array, dtype="<f8").tobytes()
    return {"name": name, "shape": list(array.shape), "data": base64.b64encode(data).decode("ascii")}


def _decode(entry: dict[str, Any]) -> tuple[str, np.ndarray]:
    try:
        shape = tuple(int(n) for n in entry["shape"])
        raw = base64.b64decode(entry["data"], validate=True)
        array = np.frombuffer(raw, dtype="<f8").reshape(shape).astype(np.float64)
        return str(entry["name"]), array
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed array entry: {exc}") from exc


def dumps_checkpoint(
    model: MlMsdaModel,
    metadata: Optional[dict[str, Any]] = None,
    optimizer: Optional[dict[str, Any]] = None,
) -> str:
    document = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "arch": model.arch.model_dump(mode="json"),
        "metadata": metadata or {},
        "parameters": [_encode(name, param.data) for name, param in model.parameters()],
        "optimizer": None,
    }
    if optimizer is not None:
        document["optimizer"] = {
            "epoch": int(optimizer["epoch"]),
            "step": int(optimizer["step"]),
            "velocity": [_encode(name, array) for name, array in optimizer["velocity"].items()],
        }
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def save_checkpoint(
    model: MlMsdaModel,
    path: str | Path,
    metadata: Optional[dict[str, Any]] = None,
    optimizer: Optional[dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_checkpoint(model, metadata, optimizer), encoding="utf-8")
    return path


def loads_checkpoint(text: str) -> Checkpoint:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint is not valid JSON: {exc}") from exc
    if not isinstance(document, dict) or document.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError("not an ml-msda checkpoint")
    if document.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {document.get('version')!r}, "
            f"expected {CHECKPOINT_VERSION}"
        )
    try:
        arch = ArchConfig.model_validate(document["arch"])
    except (KeyError, ValidationError) as exc:
        raise CheckpointError(f"invalid architecture block: {exc}") from exc

    model = init_model(arch, seed=0)
    params = model.parameters()
    entries = document.get("parameters")
    if not isinstance(entries, list) or len(entries) != len(params):
        raise CheckpointError(
            f"checkpoint lists {len(entries) if isinstance(entries, list) else 'no'} parameters, "
            f"architecture declares {len(params)}"
        )
    for (name, param), entry in zip(params, entries):
        stored_name, array = _decode(entry)
        if stored_name != name or array.shape != param.shape:
            raise CheckpointError(
                f"parameter {stored_name} {array.shape} does not match {name} {param.shape}"
            )
        try:
            param.data = array
        except ArithmeticError as exc:
            raise CheckpointError(f"parameter {name} holds non-finite values") from exc

    optimizer = document.get("optimizer")
    if optimizer is not None:
        try:
            optimizer = {
                "epoch": int(optimizer["epoch"]),
                "step": int(optimizer["step"]),
                "velocity": dict(_decode(entry) for entry in optimizer["velocity"]),
            }
        except (KeyError, TypeError) as exc:
            raise CheckpointError(f"malformed optimizer block: {exc}") from exc
    return Checkpoint(model=model, metadata=document.get("metadata") or {}, optimizer=optimizer)


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    return loads_checkpoint(path.read_text(encoding="utf-8"))
