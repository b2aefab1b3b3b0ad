"""JSON interchange for channels, circuits, cQED rounds and states.

Complex entries are ``[re, im]`` pairs and matrices are nested row lists.
Floats go through ``json`` unchanged, which writes the shortest string that
parses back to the same double, so files round-trip exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .channel_repr import ChannelError, ChannelSpec, ChoiMatrix, KrausSet, SuperOperator
from .cqed_decomp import CqedCircuit, CqedRound, EntanglerAngles
from .tree_synthesis import AdaptiveCircuit, labels_at


class FormatError(ChannelError):
    pass


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in m]
    return [encode_matrix(row) for row in m]


def decode_matrix(data: Any) -> np.ndarray:
    try:
        a = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"not a numeric array: {exc}") from exc
    if a.ndim < 2 or a.shape[-1] != 2:
        raise FormatError("complex entries must be [re, im] pairs")
    z = a[..., 0] + 1j * a[..., 1]
    if not np.all(np.isfinite(z)):
        raise FormatError("non-finite matrix entry")
    return z


def _require(obj: dict, *keys: str) -> None:
    if not isinstance(obj, dict):
        raise FormatError("expected a JSON object")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise FormatError(f"missing keys: {', '.join(missing)}")


def _square(m: np.ndarray, n: int, what: str) -> np.ndarray:
    if m.shape != (n, n):
        raise FormatError(f"{what} has shape {m.shape}, expected {(n, n)}")
    return m


def channel_to_json(spec: ChannelSpec, repr_name: str | None = None) -> dict:
    repr_name = repr_name or spec.repr_name
    if repr_name == "kraus":
        mats = list(spec.data.ops) if isinstance(spec.data, KrausSet) else list(spec.kraus.ops)
    elif repr_name == "superop":
        mats = [spec.superop.matrix]
    elif repr_name == "choi":
        mats = [spec.choi.matrix]
    else:
        raise FormatError(f"unknown representation {repr_name!r}")
    out = {"dim": spec.dim, "repr": repr_name, "matrices": [encode_matrix(m) for m in mats]}
    if spec.label:
        out["label"] = spec.label
    return out


def channel_from_json(obj: dict) -> ChannelSpec:
    _require(obj, "dim", "repr", "matrices")
    d, kind = int(obj["dim"]), obj["repr"]
    mats = [decode_matrix(m) for m in obj["matrices"]]
    if not mats:
        raise FormatError("no matrices")
    label = obj.get("label", "")
    if kind == "kraus":
        return ChannelSpec(KrausSet([_square(m, d, "Kraus operator") for m in mats]), label=label)
    if len(mats) != 1:
        raise FormatError(f"{kind} channel needs exactly one matrix")
    m = _square(mats[0], d * d, kind)
    if kind == "superop":
        return ChannelSpec(SuperOperator(m), label=label)
    if kind == "choi":
        return ChannelSpec(ChoiMatrix(m), label=label)
    raise FormatError(f"unknown representation {kind!r}")


def circuit_to_json(c: AdaptiveCircuit) -> dict:
    levels = [lab for lvl in range(c.depth) for lab in labels_at(lvl)]
    return {
        "dim": c.dim,
        "depth": c.depth,
        "nodes": [
            {"label": lab, "block0": encode_matrix(c.nodes[lab].block0), "block1": encode_matrix(c.nodes[lab].block1)}
            for lab in levels
        ],
        "leaves": [{"label": lab, "kraus": encode_matrix(k)} for lab, k in c.leaf_kraus.items()],
    }


def circuit_from_json(obj: dict) -> AdaptiveCircuit:
    _require(obj, "dim", "depth", "nodes")
    d = int(obj["dim"])
    blocks = {}
    for node in obj["nodes"]:
        _require(node, "label", "block0", "block1")
        blocks[node["label"]] = (
            _square(decode_matrix(node["block0"]), d, "block0"),
            _square(decode_matrix(node["block1"]), d, "block1"),
        )
    if not blocks:
        raise FormatError("circuit has no nodes")
    try:
        c = AdaptiveCircuit.from_blocks(blocks)
    except ChannelError as exc:
        raise FormatError(str(exc)) from exc
    if c.depth != int(obj["depth"]):
        raise FormatError(f"declared depth {obj['depth']} but nodes imply {c.depth}")
    return c


def cqed_to_json(q: CqedCircuit) -> dict:
    rounds = []
    for lab in sorted(q.rounds, key=lambda s: (len(s), s)):
        r = q.rounds[lab]
        rounds.append(
            {
                "label": lab,
                "V": encode_matrix(r.V),
                "theta": [float(x) for x in r.angles.theta],
                "W0": encode_matrix(r.W0),
                "W1": encode_matrix(r.W1),
                "degenerate": r.degenerate,
            }
        )
    return {"dim": q.dim, "depth": q.depth, "rounds": rounds}


def cqed_from_json(obj: dict) -> CqedCircuit:
    _require(obj, "dim", "depth", "rounds")
    rounds = {}
    for r in obj["rounds"]:
        _require(r, "label", "V", "theta", "W0", "W1")
        rounds[r["label"]] = CqedRound(
            decode_matrix(r["V"]),
            EntanglerAngles(np.asarray(r["theta"], dtype=float)),
            decode_matrix(r["W0"]),
            decode_matrix(r["W1"]),
            bool(r.get("degenerate", False)),
        )
    return CqedCircuit(int(obj["dim"]), int(obj["depth"]), rounds)


def state_to_json(rho: np.ndarray) -> dict:
    return {"dim": int(rho.shape[0]), "rho": encode_matrix(rho)}


def state_from_json(obj: dict) -> np.ndarray:
    """Read ``{"dim", "rho"}`` (density matrix) or ``{"dim", "ket"}`` (pure state)."""
    _require(obj, "dim")
    d = int(obj["dim"])
    if "rho" in obj:
        return _square(decode_matrix(obj["rho"]), d, "rho")
    if "ket" in obj:
        v = np.asarray(obj["ket"], dtype=float)
        if v.shape != (d, 2):
            raise FormatError(f"ket has shape {v.shape[:-1]}, expected ({d},)")
        v = v[:, 0] + 1j * v[:, 1]
        if np.linalg.norm(v) == 0:
            raise FormatError("zero ket")
        v = v / np.linalg.norm(v)
        return np.outer(v, v.conj())
    raise FormatError("state needs 'rho' or 'ket'")


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=1) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def jsonl(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r) + "\n" for r in records)
