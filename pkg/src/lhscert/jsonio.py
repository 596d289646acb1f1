"""JSON serialization helpers shared by states, certificates and the CLI.

Complex entries are stored as two-element [re, im] lists; operators carry
their dimensions and trace explicitly so files are self-describing.
"""
from __future__ import annotations

import json
from typing import Any, Sequence

import numpy as np

from .errors import ValidationError


def complex_to_pair(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def pair_to_complex(pair: Sequence[float]) -> complex:
    if len(pair) != 2:
        raise ValidationError(f"complex entry must be a [re, im] pair, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def matrix_to_json(M: np.ndarray) -> list[list[list[float]]]:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2:
        raise ValidationError(f"expected a matrix, got array of ndim {M.ndim}")
    return [[complex_to_pair(M[i, j]) for j in range(M.shape[1])] for i in range(M.shape[0])]


def matrix_from_json(data: Any, shape: tuple[int, int] | None = None) -> np.ndarray:
    try:
        M = np.array([[pair_to_complex(cell) for cell in row] for row in data],
                     dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix payload: {exc}") from exc
    if M.ndim != 2:
        raise ValidationError("matrix payload must be two-dimensional")
    if shape is not None and M.shape != tuple(shape):
        raise ValidationError(f"matrix payload has shape {M.shape}, expected {shape}")
    return M


def operator_to_json(M: np.ndarray, dims: Sequence[int]) -> dict[str, Any]:
    M = np.asarray(M, dtype=np.complex128)
    total = int(np.prod(dims))
    if M.shape != (total, total):
        raise ValidationError(
            f"operator of shape {M.shape} does not match dims {tuple(dims)}"
        )
    return {
        "dims": [int(d) for d in dims],
        "trace": complex_to_pair(np.trace(M)),
        "entries": matrix_to_json(M),
    }


def operator_from_json(data: dict[str, Any]) -> tuple[np.ndarray, tuple[int, ...]]:
    for key in ("dims", "trace", "entries"):
        if key not in data:
            raise ValidationError(f"operator payload missing key {key!r}")
    dims = tuple(int(d) for d in data["dims"])
    total = int(np.prod(dims))
    M = matrix_from_json(data["entries"], shape=(total, total))
    declared = pair_to_complex(data["trace"])
    actual = complex(np.trace(M))
    if abs(declared - actual) > 1e-8 * max(1.0, abs(actual)):
        raise ValidationError(
            f"declared trace {declared} disagrees with entries (trace {actual})"
        )
    return M, dims


def save_json(path: str, payload: dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path: str) -> dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top-level JSON value must be an object")
    return data
