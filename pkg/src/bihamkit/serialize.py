"""JSON encodings for matrices, phase points, slice points and spin data.

Matrices travel as {"re": [[...]], "im": [[...]]} in row-major order; the
composite objects are plain JSON objects over that encoding.
"""

from __future__ import annotations

import numpy as np

from .linalg import as_complex_matrix, as_real_diagonal
from .observables import PhasePoint, phase_point
from .reduction import ReducedPoint, reduced_point
from .spin import SpinCoordinates, spin_coordinates


def matrix_to_json(m) -> dict:
    a = as_complex_matrix(m)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict) or "re" not in obj or "im" not in obj:
        raise ValueError('matrix JSON must carry "re" and "im" fields')
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if re.shape != im.shape:
        raise ValueError("re and im parts must have the same shape")
    return as_complex_matrix(re + 1j * im)


def vector_from_json(obj) -> np.ndarray:
    return as_real_diagonal(np.asarray(obj, dtype=float))


def phase_point_to_json(x: PhasePoint) -> dict:
    return {"g": matrix_to_json(x.g), "J": matrix_to_json(x.J)}


def phase_point_from_json(obj) -> PhasePoint:
    if not isinstance(obj, dict) or "g" not in obj or "J" not in obj:
        raise ValueError('phase point JSON must carry "g" and "J" fields')
    return phase_point(matrix_from_json(obj["g"]), matrix_from_json(obj["J"]))


def reduced_point_to_json(y: ReducedPoint) -> dict:
    return {"q": y.q.tolist(), "J": matrix_to_json(y.J)}


def reduced_point_from_json(obj) -> ReducedPoint:
    if not isinstance(obj, dict) or "q" not in obj or "J" not in obj:
        raise ValueError('reduced point JSON must carry "q" and "J" fields')
    return reduced_point(vector_from_json(obj["q"]), matrix_from_json(obj["J"]))


def spin_to_json(s: SpinCoordinates) -> dict:
    return {
        "q": s.q.tolist(),
        "p": s.p.tolist(),
        "xi_l": matrix_to_json(s.xi_l),
        "xi_r": matrix_to_json(s.xi_r),
    }


def spin_from_json(obj) -> SpinCoordinates:
    required = ("q", "p", "xi_l", "xi_r")
    if not isinstance(obj, dict) or any(k not in obj for k in required):
        raise ValueError(f"spin JSON must carry {required}")
    return spin_coordinates(
        vector_from_json(obj["q"]),
        np.asarray(obj["p"], dtype=float),
        matrix_from_json(obj["xi_l"]),
        matrix_from_json(obj["xi_r"]),
    )
