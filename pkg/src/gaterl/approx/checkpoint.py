"""Versioned JSON checkpoints with bit-exact float64 payloads.

Layout (version 1):
    {
      "version": 1,
      "dims": [input, hidden...],
      "heads": {"policy": 2, "value": 1},
      "params": [<base64 little-endian f64, one per parameter array>],
      "optimizer": {... Adam state with base64 moments ...} | null,
      "step": N,
      "config_hash": "...",
      "rng": <numpy bit-generator state> | null
    }

Parameter order matches FeedforwardApproximator.parameters(): trunk W,b
pairs in layer order, then head W,b pairs in sorted-name order.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass

import numpy as np

from ..errors import (
    CheckpointCorruptError,
    CheckpointDimensionError,
    CheckpointVersionError,
)
from .network import FeedforwardApproximator
from .optim import Adam

FORMAT_VERSION = 1


def _encode(arr) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii")


def _decode(text, shape):
    try:
        raw = base64.b64decode(text.encode("ascii"), validate=True)
    except Exception as exc:
        raise CheckpointCorruptError(f"bad base64 payload: {exc}") from exc
    expected = int(np.prod(shape)) * 8
    if len(raw) != expected:
        raise CheckpointDimensionError(
            f"payload holds {len(raw)} bytes, shape {tuple(shape)} needs {expected}"
        )
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)


@dataclass
class Checkpoint:
    net: FeedforwardApproximator
    optimizer_state: dict | None
    step: int
    config_hash: str
    rng_state: dict | None


def save_checkpoint(net, path, optimizer=None, step=0, config_hash="", rng_state=None):
    doc = {
        "version": FORMAT_VERSION,
        "dims": net.dims,
        "heads": net.head_dims,
        "params": [_encode(p) for p in net.parameters()],
        "optimizer": None,
        "step": int(step),
        "config_hash": config_hash,
        "rng": rng_state,
    }
    if optimizer is not None:
        state = optimizer.state_dict()
        state["m"] = [_encode(a) for a in state["m"]]
        state["v"] = [_encode(a) for a in state["v"]]
        doc["optimizer"] = state
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh)
    return doc


def load_checkpoint(path) -> Checkpoint:
    try:
        with open(path, "r", encoding="ascii") as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CheckpointCorruptError(f"unreadable checkpoint: {exc}") from exc
    if not isinstance(doc, dict) or "version" not in doc:
        raise CheckpointCorruptError("not a checkpoint document")
    if doc["version"] != FORMAT_VERSION:
        raise CheckpointVersionError(f"unsupported checkpoint version {doc['version']!r}")
    try:
        dims = [int(d) for d in doc["dims"]]
        heads = {str(k): int(v) for k, v in doc["heads"].items()}
        payloads = list(doc["params"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointCorruptError(f"malformed checkpoint fields: {exc}") from exc
    net = FeedforwardApproximator(dims[0], tuple(dims[1:]), heads, seed=0)
    shapes = [p.shape for p in net.parameters()]
    if len(payloads) != len(shapes):
        raise CheckpointDimensionError(
            f"{len(payloads)} parameter payloads for {len(shapes)} arrays"
        )
    net.set_parameters([_decode(text, shape) for text, shape in zip(payloads, shapes)])
    opt_state = doc.get("optimizer")
    if opt_state is not None:
        opt_state = dict(opt_state)
        mshapes = shapes
        opt_state["m"] = [_decode(t, s) for t, s in zip(opt_state["m"], mshapes)]
        opt_state["v"] = [_decode(t, s) for t, s in zip(opt_state["v"], mshapes)]
    return Checkpoint(
        net=net,
        optimizer_state=opt_state,
        step=int(doc.get("step", 0)),
        config_hash=str(doc.get("config_hash", "")),
        rng_state=doc.get("rng"),
    )


def restore_optimizer(checkpoint: Checkpoint, params) -> Adam | None:
    if checkpoint.optimizer_state is None:
        return None
    opt = Adam(params)
    opt.load_state_dict(checkpoint.optimizer_state)
    return opt
