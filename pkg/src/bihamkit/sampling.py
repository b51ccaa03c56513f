"""Seeded random generators for points and test observables.

Everything here is deterministic given a numpy Generator, which keeps the
randomized verification suites reproducible bit for bit.
"""

from __future__ import annotations

import numpy as np

from .linalg import anti_part, haar_unitary, herm_part, matrix_exp
from .observables import (
    LEFT,
    RIGHT,
    Observable,
    PhasePoint,
    TraceWords,
    basis_matrix,
    g_entry,
    hamiltonian,
    momentum_component,
    trace_word,
)
from .reduction import ReducedObservable, ReducedPoint, SliceObservable
from .spin import SpinCoordinates, SpinFunction, to_spin


def random_complex_matrix(rng: np.random.Generator, n: int, scale: float = 1.0):
    return scale * (rng.standard_normal((n, n))
                    + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0 * n)


def random_phase_point(rng: np.random.Generator, n: int, g_scale: float = 0.4,
                       j_scale: float = 1.0) -> PhasePoint:
    """Generic point: g = exp of a moderate matrix, J unconstrained."""
    g = matrix_exp(random_complex_matrix(rng, n, g_scale) * np.sqrt(n))
    return PhasePoint(g, random_complex_matrix(rng, n, j_scale) * np.sqrt(n))


def random_decreasing_gaps(rng: np.random.Generator, n: int,
                           gap_lo: float = 0.35, gap_hi: float = 1.0):
    gaps = rng.uniform(gap_lo, gap_hi, size=n - 1) if n > 1 else np.empty(0)
    start = rng.uniform(-0.5, 0.5)
    return start - np.concatenate(([0.0], np.cumsum(gaps)))


def random_regular_phase_point(rng: np.random.Generator, n: int,
                               j_scale: float = 1.0) -> PhasePoint:
    """Point whose g has well-separated singular values."""
    q = random_decreasing_gaps(rng, n)
    g = (haar_unitary(rng, n) * np.exp(q)[None, :]) @ haar_unitary(rng, n).conj().T
    return PhasePoint(g, random_complex_matrix(rng, n, j_scale) * np.sqrt(n))


def random_reduced_point(rng: np.random.Generator, n: int, j_scale: float = 1.0,
                         shape: str = "full") -> ReducedPoint:
    """Slice point with controlled gaps; shape picks the J subspace."""
    q = random_decreasing_gaps(rng, n)
    j = random_complex_matrix(rng, n, j_scale) * np.sqrt(n)
    if shape == "hermitian":
        j = herm_part(j)
    elif shape == "antihermitian":
        j = anti_part(j)
    elif shape != "full":
        raise ValueError(f"unknown shape {shape!r}")
    return ReducedPoint(q, j)


def random_spin_coordinates(rng: np.random.Generator, n: int) -> SpinCoordinates:
    return to_spin(random_reduced_point(rng, n))


def random_near_identity_double(rng: np.random.Generator, n: int,
                                eps: float = 0.1):
    """Double point (exp(eps A), exp(eps B)) with unit-norm directions."""
    from .double import DoublePoint

    out = []
    for _ in range(2):
        a = random_complex_matrix(rng, n)
        a /= max(np.max(np.abs(a)), 1e-12)
        out.append(matrix_exp(eps * a))
    return DoublePoint(out[0], out[1])


# ---------------------------------------------------------------------------
# Observable families on the unreduced space.
# ---------------------------------------------------------------------------


def random_coordinate_observable(rng: np.random.Generator, n: int) -> Observable:
    """One draw from the coordinate and trace-word families, possibly a
    product of two draws; exact gradients throughout."""
    kind = rng.integers(0, 6)
    if kind == 0:
        a, b = rng.integers(0, n, size=2)
        return g_entry(int(a), int(b), rng.choice(["re", "im"]), n)
    if kind == 1:
        k = int(rng.integers(0, 2 * n * n))
        return momentum_component(basis_matrix(k, n))
    if kind == 2:
        return hamiltonian(int(rng.integers(1, n + 2)), rng.choice(["real", "imag"]))
    if kind == 3:
        factors = [(rng.choice(["+", "-"]), int(rng.integers(1, 3)))
                   for _ in range(int(rng.integers(1, 3)))]
        return trace_word(factors, rng.choice(["real", "imag"]))
    if kind == 4:
        return (random_coordinate_observable(rng, n)
                * random_coordinate_observable(rng, n))
    left = random_coordinate_observable(rng, n)
    right = random_coordinate_observable(rng, n)
    return float(rng.uniform(-1, 1)) * left + float(rng.uniform(-1, 1)) * right


def _random_constant(rng: np.random.Generator, n: int):
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / n


def random_right_invariant_observable(rng: np.random.Generator, n: int) -> Observable:
    """Words in the blocks g g^* and J with one constant insertion: invariant
    under g -> g eta^{-1} but not under the left action."""
    m = _random_constant(rng, n)
    words = [
        [(1.0, (m, "g", "gstar"))],
        [(1.0, (m, "g", "gstar", "j"))],
        [(0.5, (m, "g", "gstar", "j", "j"))],
        [(1.0, (m, "j", "g", "gstar"))],
    ]
    picks = rng.choice(len(words), size=2, replace=False)
    terms = [t for i in picks for t in words[int(i)]]
    return TraceWords(terms, invariance=RIGHT)


def random_left_invariant_observable(rng: np.random.Generator, n: int) -> Observable:
    """Words in g^* g and -g^{-1} J g with one constant insertion: invariant
    under the left action but not the right one."""
    m = _random_constant(rng, n)
    tilde = (-1.0, ("ginv", "j", "g"))
    words = [
        [(1.0, (m, "gstar", "g"))],
        [(tilde[0], (m,) + tilde[1])],
        [(tilde[0] ** 2, (m,) + tilde[1] + tilde[1])],
        [(tilde[0], (m, "gstar", "g") + tilde[1])],
    ]
    picks = rng.choice(len(words), size=2, replace=False)
    terms = [t for i in picks for t in words[int(i)]]
    return TraceWords(terms, invariance=LEFT)


def random_bi_invariant_observable(rng: np.random.Generator, n: int) -> Observable:
    factors = [(rng.choice(["+", "-"]), int(rng.integers(1, 3)))
               for _ in range(int(rng.integers(1, 3)))]
    w = trace_word(factors, rng.choice(["real", "imag"]))
    h = hamiltonian(int(rng.integers(1, n + 1)), rng.choice(["real", "imag"]))
    return float(rng.uniform(-1, 1)) * w + float(rng.uniform(-1, 1)) * h


# ---------------------------------------------------------------------------
# Torus-invariant functions on the slice, the Hermitian slice and the spin
# coordinates: smooth closures over a few primitive invariants.
# ---------------------------------------------------------------------------


def _combine(rng: np.random.Generator, prims):
    c0 = float(rng.uniform(-0.5, 0.5))
    lin = rng.uniform(-1.0, 1.0, size=len(prims))
    quad = rng.uniform(-0.5, 0.5, size=(len(prims), len(prims)))

    def fn(arg):
        vals = np.array([p(arg) for p in prims])
        return c0 + float(lin @ vals) + float(vals @ quad @ vals)

    return fn


def _slice_primitives(rng: np.random.Generator, n: int):
    i, j = rng.integers(0, n, size=2)
    if i == j:
        j = (i + 1) % n
    k = int(rng.integers(1, min(n, 3) + 1))
    prims = [
        lambda y: float(np.sum(y.q**2) / n),
        lambda y, k=k: float(np.trace(np.linalg.matrix_power(y.J, k)).real) / n,
        lambda y, k=k: float(np.trace(np.linalg.matrix_power(y.J, k)).imag) / n,
        lambda y, i=int(i), j=int(j): float(abs(y.J[i, j]) ** 2),
        lambda y, i=int(i), j=int(j): float((y.J[i, j] * y.J[j, i]).real),
        lambda y: float(np.sum(np.real(np.diag(y.J))) / n),
        lambda y, i=int(i): float(y.q[i]),
    ]
    picks = rng.choice(len(prims), size=3, replace=False)
    return [prims[int(p)] for p in picks]


def random_invariant_reduced_observable(rng: np.random.Generator, n: int,
                                        step: float = 1e-5) -> ReducedObservable:
    return ReducedObservable(_combine(rng, _slice_primitives(rng, n)),
                             invariant=True, step=step)


def random_slice_observable(rng: np.random.Generator, n: int,
                            step: float = 1e-5) -> SliceObservable:
    """Torus-invariant function of (q, J^-) on the Hermitian slice."""
    return SliceObservable(_combine(rng, _slice_primitives(rng, n)),
                           invariant=True, step=step)


def random_spin_function(rng: np.random.Generator, n: int,
                         step: float = 1e-5) -> SpinFunction:
    i, j = rng.integers(0, n, size=2)
    if i == j:
        j = (i + 1) % n
    prims = [
        lambda s: float(np.sum(s.q**2) / n),
        lambda s: float(np.sum(s.p**2) / n),
        lambda s, i=int(i): float(s.p[i] * s.q[i]),
        lambda s: float(np.trace(s.xi_l @ s.xi_l).real) / n,
        lambda s: float(np.trace(s.xi_r @ s.xi_r).real) / n,
        lambda s: float(np.trace(s.xi_l @ s.xi_r).real) / n,
        lambda s, i=int(i), j=int(j): float(abs(s.xi_l[i, j]) ** 2),
        lambda s, i=int(i), j=int(j): float((s.xi_r[i, j] * s.xi_l[j, i]).real),
        lambda s, i=int(i): float(s.xi_l[i, i].imag),
    ]
    picks = rng.choice(len(prims), size=3, replace=False)
    return SpinFunction(_combine(rng, [prims[int(p)] for p in picks]),
                        invariant=True, step=step)


def spin_pullback(f: SpinFunction) -> ReducedObservable:
    """The spin function read as a torus-invariant slice function."""
    return ReducedObservable(lambda y: f.value(to_spin(y)), invariant=True,
                             step=f.step)


def coordinate_spin_function(which: str, index: int) -> SpinFunction:
    """The coordinate functions q_i and p_i of the spin parametrization."""
    if which == "q":
        return SpinFunction(lambda s: float(s.q[index]), invariant=True)
    if which == "p":
        return SpinFunction(lambda s: float(s.p[index]), invariant=True)
    raise ValueError(f"unknown coordinate {which!r}")
