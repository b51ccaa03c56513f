"""Two-spin parametrization of the reduced slice.

A slice point (q, J) is equivalent to the data (q, p, xi_l, xi_r) with

    xi_l = -J^+,   xi_r = (e^{-q} J e^q)^+,   p_k = (J^-)_kk,

where the two anti-Hermitian spins obey the diagonal coupling
xi_l_kk + xi_r_kk = 0, and J is reconstructed entrywise by

    J_ij = p_i d_ij - (1 - d_ij)(coth(q_i - q_j) xi_l_ij
                                 + xi_r_ij / sinh(q_i - q_j)) - xi_l_ij.

In these variables the quadratic spectral Hamiltonian becomes the
hyperbolic Sutherland Hamiltonian coupled to two spins, and the first
reduced Poisson bracket splits into canonical (q, p) pairs plus a
constrained Lie-Poisson bracket of two copies of u(n):

    {F,H} = sum_i (dF/dq_i dH/dp_i - dH/dq_i dF/dp_i)
          + <xi_l, [dF_l, dH_l]> + <xi_r, [dF_r_perp, dH_r_perp]>,

with the partial gradients taken in the constrained directions
(dF_l = d_{xi_l_perp} F + d_{xi_0} F).
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .linalg import (
    adq_apply,
    anti_part,
    as_complex_matrix,
    check_regular,
    comm,
    coth_map,
    gap_matrix,
    maxabs,
    pairing,
)
from .reduction import ReducedPoint, diagonal_unitary, reduced_point

FD_STEP = 1e-5


class SpinCoordinates(NamedTuple):
    """Coordinates (q, p, xi_l, xi_r) with anti-Hermitian coupled spins."""

    q: np.ndarray
    p: np.ndarray
    xi_l: np.ndarray
    xi_r: np.ndarray


def spin_coordinates(q, p, xi_l, xi_r) -> SpinCoordinates:
    qv = check_regular(q)
    pv = np.asarray(p, dtype=float)
    xl = as_complex_matrix(xi_l)
    xr = as_complex_matrix(xi_r)
    if pv.shape != qv.shape or xl.shape[0] != qv.size or xr.shape[0] != qv.size:
        raise ValueError("size mismatch among spin coordinates")
    scale = 1.0 + max(maxabs(xl), maxabs(xr))
    if maxabs(xl + xl.conj().T) > 1e-10 * scale or \
            maxabs(xr + xr.conj().T) > 1e-10 * scale:
        raise ValueError("spins must be anti-Hermitian")
    if maxabs(np.diag(xl) + np.diag(xr)) > 1e-10 * scale:
        raise ValueError("diagonal coupling xi_l_kk + xi_r_kk = 0 violated")
    return SpinCoordinates(qv, pv, xl, xr)


def to_spin(y: ReducedPoint) -> SpinCoordinates:
    """Spin coordinates of a slice point."""
    q, j = reduced_point(*y)
    xl = -anti_part(j)
    conj = j * np.exp(-gap_matrix(q))
    xr = anti_part(conj)
    p = np.real(np.diag(j))
    return SpinCoordinates(q, p, xl, xr)


def from_spin(s: SpinCoordinates) -> ReducedPoint:
    """Reconstruct the slice point from spin coordinates."""
    q, p, xl, xr = spin_coordinates(*s)
    off_r = xr - np.diag(np.diag(xr))
    j = (np.diag(p).astype(complex)
         - coth_map(q, xl)
         - adq_apply(q, off_r, "inv_sinh")
         - xl)
    return ReducedPoint(q, j)


def gauge_transform(s: SpinCoordinates, tau) -> SpinCoordinates:
    """Simultaneous conjugation of both spins by a diagonal unitary."""
    t = np.asarray(tau, dtype=complex)
    if t.ndim == 1:
        t = np.diag(t)
    td = t.conj().T
    return SpinCoordinates(s.q.copy(), s.p.copy(), t @ s.xi_l @ td, t @ s.xi_r @ td)


def spin_hamiltonian_1(q, p, xi) -> float:
    """Hyperbolic spin Sutherland energy with one spin:

        1/2 sum p_i^2 + sum_{i<j} |xi_ij|^2 / sinh^2(q_i - q_j),

    for xi anti-Hermitian with zero diagonal."""
    qv = check_regular(q)
    pv = np.asarray(p, dtype=float)
    x = as_complex_matrix(xi)
    if maxabs(x + x.conj().T) > 1e-10 * (1.0 + maxabs(x)) or \
            maxabs(np.diag(x)) > 1e-10 * (1.0 + maxabs(x)):
        raise ValueError("spin must be anti-Hermitian with zero diagonal")
    total = 0.5 * float(pv @ pv)
    for i in range(qv.size):
        for j in range(i + 1, qv.size):
            total += abs(x[i, j]) ** 2 / np.sinh(qv[i] - qv[j]) ** 2
    return total


def spin_hamiltonian_2(s: SpinCoordinates) -> float:
    """Hyperbolic Sutherland energy coupled to two spins:

        1/2 sum (p_i^2 - |xi_l_ii|^2)
        + sum_{i<j} [ (|xi_l_ij|^2 + |xi_r_ij|^2 - 2 c_ij) / sinh^2(q_i - q_j)
                      + c_ij / sinh^2((q_i - q_j)/2) ],

    with the coupling c_ij = Re(xi_r_ij conj(xi_l_ij)); equal to half the
    real trace of the square of the reconstructed matrix.
    """
    q, p, xl, xr = spin_coordinates(*s)
    total = 0.5 * float(np.sum(p**2) - np.sum(np.abs(np.diag(xl)) ** 2))
    for i in range(q.size):
        for j in range(i + 1, q.size):
            gap = q[i] - q[j]
            cross = float((xr[i, j] * np.conj(xl[i, j])).real)
            total += (abs(xl[i, j]) ** 2 + abs(xr[i, j]) ** 2 - 2.0 * cross) \
                / np.sinh(gap) ** 2
            total += cross / np.sinh(gap / 2.0) ** 2
    return total


class SpinFunction:
    """Torus-invariant real function of (q, p, xi_l_perp, xi_r_perp, xi_0).

    Partial gradients are central differences in the constrained directions:
    scalar probes for q and p, off-diagonal anti-Hermitian probes for the
    two perpendicular spins, and diagonal anti-Hermitian probes for xi_0
    (which shifts the diagonals of xi_l and xi_r in opposite directions).
    """

    def __init__(self, fn: Callable[[SpinCoordinates], float],
                 invariant: bool = True, step: float = FD_STEP,
                 check_seed: int | None = 0):
        self.fn = fn
        self.invariant = invariant
        self.step = step
        self._verified = False
        self._check_seed = check_seed

    def value(self, s: SpinCoordinates) -> float:
        return float(self.fn(s))

    def verify_invariance(self, s: SpinCoordinates, trials: int = 8,
                          tol: float = 1e-9) -> None:
        rng = np.random.default_rng(self._check_seed)
        base = self.value(s)
        for _ in range(trials):
            tau = diagonal_unitary(rng.uniform(0.0, 2.0 * np.pi, size=s.q.size))
            moved = self.value(gauge_transform(s, tau))
            if abs(moved - base) > tol * (1.0 + abs(base)):
                raise ValueError("spin function is not torus invariant")
        self._verified = True

    def _maybe_verify(self, s: SpinCoordinates) -> None:
        if self.invariant and not self._verified:
            self.verify_invariance(s)

    def _scalar_grad(self, s: SpinCoordinates, which: str) -> np.ndarray:
        base = s.q if which == "q" else s.p
        h = self.step * (1.0 + maxabs(base))
        out = np.empty(base.size)
        for i in range(base.size):
            e = np.zeros(base.size)
            e[i] = h
            if which == "q":
                hi = self.fn(SpinCoordinates(s.q + e, s.p, s.xi_l, s.xi_r))
                lo = self.fn(SpinCoordinates(s.q - e, s.p, s.xi_l, s.xi_r))
            else:
                hi = self.fn(SpinCoordinates(s.q, s.p + e, s.xi_l, s.xi_r))
                lo = self.fn(SpinCoordinates(s.q, s.p - e, s.xi_l, s.xi_r))
            out[i] = (hi - lo) / (2.0 * h)
        return out

    def dq(self, s: SpinCoordinates) -> np.ndarray:
        self._maybe_verify(s)
        return self._scalar_grad(s, "q")

    def dp(self, s: SpinCoordinates) -> np.ndarray:
        self._maybe_verify(s)
        return self._scalar_grad(s, "p")

    def _spin_rate(self, s: SpinCoordinates, side: str, direction) -> float:
        if side == "l":
            hi = self.fn(SpinCoordinates(s.q, s.p, s.xi_l + direction, s.xi_r))
            lo = self.fn(SpinCoordinates(s.q, s.p, s.xi_l - direction, s.xi_r))
        else:
            hi = self.fn(SpinCoordinates(s.q, s.p, s.xi_l, s.xi_r + direction))
            lo = self.fn(SpinCoordinates(s.q, s.p, s.xi_l, s.xi_r - direction))
        return hi - lo

    def _perp_grad(self, s: SpinCoordinates, side: str) -> np.ndarray:
        n = s.q.size
        h = self.step * (1.0 + max(maxabs(s.xi_l), maxabs(s.xi_r)))
        w = np.zeros((n, n), dtype=complex)
        for a in range(n):
            for b in range(a + 1, n):
                skew = np.zeros((n, n), dtype=complex)
                skew[a, b] = 1.0
                skew[b, a] = -1.0
                sym = np.zeros((n, n), dtype=complex)
                sym[a, b] = sym[b, a] = 1.0j
                # <A, A> = <S, S> = -2 for these anti-Hermitian basis elements.
                alpha = self._spin_rate(s, side, h * skew) / (2.0 * h) / -2.0
                beta = self._spin_rate(s, side, h * sym) / (2.0 * h) / -2.0
                w += alpha * skew + beta * sym
        return w

    def dxi_l_perp(self, s: SpinCoordinates) -> np.ndarray:
        self._maybe_verify(s)
        return self._perp_grad(s, "l")

    def dxi_r_perp(self, s: SpinCoordinates) -> np.ndarray:
        self._maybe_verify(s)
        return self._perp_grad(s, "r")

    def dxi_0(self, s: SpinCoordinates) -> np.ndarray:
        """Gradient along the diagonal direction xi_l += i t E_kk,
        xi_r -= i t E_kk; an element of the diagonal anti-Hermitian algebra."""
        self._maybe_verify(s)
        n = s.q.size
        h = self.step * (1.0 + max(maxabs(s.xi_l), maxabs(s.xi_r)))
        w = np.zeros((n, n), dtype=complex)
        for a in range(n):
            d = np.zeros((n, n), dtype=complex)
            d[a, a] = 1.0j * h
            hi = self.fn(SpinCoordinates(s.q, s.p, s.xi_l + d, s.xi_r - d))
            lo = self.fn(SpinCoordinates(s.q, s.p, s.xi_l - d, s.xi_r + d))
            rate = (hi - lo) / (2.0 * h)
            # <iE_aa, iE_aa> = -1.
            w[a, a] = -1.0j * rate
        return w


def spin_pb1(f: SpinFunction, h: SpinFunction, s: SpinCoordinates) -> float:
    """First reduced bracket in spin coordinates: canonical (q, p) pairs plus
    the constrained Lie-Poisson terms of the two spins."""
    s = spin_coordinates(*s)
    qp = float(f.dq(s) @ h.dp(s) - h.dq(s) @ f.dp(s))
    fl = f.dxi_l_perp(s) + f.dxi_0(s)
    hl = h.dxi_l_perp(s) + h.dxi_0(s)
    fr = f.dxi_r_perp(s)
    hr = h.dxi_r_perp(s)
    return qp + pairing(s.xi_l, comm(fl, hl)) + pairing(s.xi_r, comm(fr, hr))
