"""State JSON format and CSV report rows.

A state file is ``{"n_qubits": 2 | 3, "matrix": [[re, im], ...]}`` with the
matrix stored row-major, ``4 ** n_qubits`` pairs in total.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .states import State, validate


class StateFormatError(ValueError):
    """The input could not be parsed as a state file."""


def _reject_constant(token):
    raise StateFormatError(f"non-finite number {token!r} in state file")


def parse_state_dict(obj) -> tuple[int, np.ndarray]:
    """Return ``(n_qubits, matrix)`` from a decoded state object (no physics checks)."""
    if not isinstance(obj, dict):
        raise StateFormatError("state file must hold a JSON object")
    n = obj.get("n_qubits")
    if isinstance(n, bool) or n not in (2, 3):
        raise StateFormatError(f"n_qubits must be 2 or 3, got {n!r}")
    entries = obj.get("matrix")
    dim = 2**n
    if not isinstance(entries, list) or len(entries) != dim * dim:
        got = len(entries) if isinstance(entries, list) else type(entries).__name__
        raise StateFormatError(f"matrix must be a list of {dim * dim} [re, im] pairs, got {got}")
    values = []
    for i, pair in enumerate(entries):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in pair)
        ):
            raise StateFormatError(f"matrix entry {i} is not a [re, im] pair of numbers")
        if not all(math.isfinite(x) for x in pair):
            raise StateFormatError(f"matrix entry {i} is not finite")
        values.append(complex(pair[0], pair[1]))
    return n, np.array(values, dtype=complex).reshape(dim, dim)


def loads_state_matrix(text: str) -> tuple[int, np.ndarray]:
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"invalid JSON: {exc}") from exc
    return parse_state_dict(obj)


def load_state(path, tol: float = 1e-10, repair: bool = False) -> State:
    """Read and validate a state file.

    Raises ``OSError``/``StateFormatError`` for unreadable or malformed files
    and ``StateValidationError`` when the matrix is not a density matrix.
    """
    _, matrix = loads_state_matrix(Path(path).read_text())
    return validate(matrix, tol, repair)


def state_to_dict(state_or_matrix) -> dict:
    m = np.asarray(getattr(state_or_matrix, "matrix", state_or_matrix), dtype=complex)
    n = int(round(math.log2(m.shape[0])))
    return {"n_qubits": n, "matrix": [[float(z.real), float(z.imag)] for z in m.ravel()]}


def dumps_state(state_or_matrix) -> str:
    return json.dumps(state_to_dict(state_or_matrix))


def fmt_real(x: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(x), ".17g")


CSV_HEADER_2Q = ("index", "S", "M", "violates")
CSV_HEADER_3Q = ("index", "s_ba_max", "s_ca_max", "lhs", "slack")
