"""
Operator Serialization
JSON text format for PolyMatrix, PIOperator and named operator bundles
"""

import json
import logging
from pathlib import Path
from typing import Dict, Mapping, Union

from polynomials.poly_matrix import PolyMatrix
from operators.pi_operator import BLOCK_NAMES, PIOperator

# Setup logging
logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

PathLike = Union[str, Path]


def operator_to_dict(op: PIOperator) -> Dict:
    """Plain-Python form of a decision-free operator."""
    return {
        "kind": "pi_operator",
        "domain": list(op.domain),
        "dims_in": list(op.dims_in),
        "dims_out": list(op.dims_out),
        "blocks": {name: getattr(op, name).to_dict() for name in BLOCK_NAMES},
    }


def operator_from_dict(data: Mapping) -> PIOperator:
    """Inverse of operator_to_dict."""
    if data.get("kind") != "pi_operator":
        raise ValueError(f"Not a serialized PI operator: kind={data.get('kind')!r}")
    blocks = {name: PolyMatrix.from_dict(data["blocks"][name]) for name in BLOCK_NAMES}
    return PIOperator(
        tuple(data["dims_in"]),
        tuple(data["dims_out"]),
        tuple(data["domain"]),
        *(blocks[name] for name in BLOCK_NAMES),
    )


def dumps(op: PIOperator) -> str:
    """Serialize an operator to JSON text. Floats use repr, so round-trips are exact."""
    return json.dumps({"version": FORMAT_VERSION, **operator_to_dict(op)}, indent=2)


def loads(text: str) -> PIOperator:
    return operator_from_dict(json.loads(text))


def save_operators(path: PathLike, operators: Mapping[str, object], meta: Mapping = None) -> Path:
    """
    Save a bundle of named operators and matrices.

    Args:
        path: Output file
        operators: Map from name to PIOperator, PolyMatrix, or nested
            plain values (lists, numbers)
        meta: Extra JSON-compatible fields stored alongside

    Returns:
        The path written
    """
    payload = {"version": FORMAT_VERSION, "meta": dict(meta or {}), "items": {}}
    for name, value in operators.items():
        if isinstance(value, PIOperator):
            payload["items"][name] = operator_to_dict(value)
        elif isinstance(value, PolyMatrix):
            payload["items"][name] = {"kind": "poly_matrix", **value.to_dict()}
        else:
            payload["items"][name] = {"kind": "value", "value": value}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2))
    logger.info(f"Saved {len(operators)} item(s) to {path}")
    return path


def load_operators(path: PathLike) -> Dict[str, object]:
    """
    Load a bundle written by save_operators.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: On an unknown format version or item kind
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No such operator file: {path}")
    payload = json.loads(path.read_text())
    if payload.get("version") != FORMAT_VERSION:
        raise ValueError(f"Unsupported format version {payload.get('version')}")
    items = {}
    for name, data in payload.get("items", {}).items():
        kind = data.get("kind")
        if kind == "pi_operator":
            items[name] = operator_from_dict(data)
        elif kind == "poly_matrix":
            items[name] = PolyMatrix.from_dict(data)
        elif kind == "value":
            items[name] = data["value"]
        else:
            raise ValueError(f"Unknown item kind {kind!r} for {name}")
    items["__meta__"] = payload.get("meta", {})
    return items
