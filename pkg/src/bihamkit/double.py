"""The doubled group G x G and the factorization map onto (g, J).

The doubled Lie algebra carries the indefinite pairing

    <(X1, X2), (Y1, Y2)>_2 = <X1, Y1> - <X2, Y2>,

for which both the diagonal subalgebra {(X, X)} and the dual subalgebra
{(r_+ Z, r_- Z)} are isotropic.  With rho = (P_diag - P_dual)/2 the two
brackets on functions of (g1, g2) read

    {F, H}_pm = <DF, rho DH>_2 +- <D'F, rho D'H>_2,

the minus sign giving the Drinfeld double bracket and the plus sign the
Heisenberg one.  Near the identity every (g1, g2) factorizes through the
diagonal and dual subgroups both ways; reading off J = g1^{-1} g2 as a
unit-upper times diagonal times unit-lower product, and g from the
complementary factorization, defines the map psi whose pushforward carries
the Heisenberg bracket onto the quadratic bracket of the (g, J) space.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

from .linalg import (
    as_complex_matrix,
    ldu,
    maxabs,
    pairing,
    principal_sqrt_diagonal,
    r_minus,
    r_plus,
    udl,
)
from .observables import Observable, PhasePoint, _elementary_exp

FD_STEP = 1e-5


class DoublePoint(NamedTuple):
    """Pair of invertible group elements (g1, g2)."""

    g1: np.ndarray
    g2: np.ndarray


def double_point(g1, g2) -> DoublePoint:
    a = as_complex_matrix(g1)
    b = as_complex_matrix(g2)
    if a.shape != b.shape:
        raise ValueError("g1 and g2 must have the same size")
    for m in (a, b):
        s = np.linalg.svd(m, compute_uv=False)
        if s[-1] <= 1e-13 * max(1.0, float(s[0])):
            raise ValueError("singular group element in double point")
    return DoublePoint(a, b)


def pairing2(v, w) -> float:
    """Indefinite pairing <(X1,X2),(Y1,Y2)>_2 = <X1,Y1> - <X2,Y2>."""
    return pairing(v[0], w[0]) - pairing(v[1], w[1])


def split_double(x1, x2):
    """Decompose (X1, X2) = (Y, Y) + (r_+ Z, r_- Z); returns both parts."""
    z = x1 - x2
    y = x1 - r_plus(z)
    return (y, y), (r_plus(z), r_minus(z))


def rho(x1, x2):
    """The skew kernel rho = (P_diag - P_dual)/2 applied to (X1, X2)."""
    diag, dual = split_double(x1, x2)
    return ((diag[0] - dual[0]) / 2.0, (diag[1] - dual[1]) / 2.0)


def _dual_from_table(re_part: np.ndarray, im_part: np.ndarray) -> np.ndarray:
    return re_part.T - 1j * im_part.T


def double_gradients(fn: Callable[[DoublePoint], float], x: DoublePoint,
                     step: float = FD_STEP):
    """Left and right derivatives of a scalar function of (g1, g2), dual to
    the indefinite pairing (so the second components flip sign)."""
    g1, g2 = x
    n = g1.shape[0]
    h = step * (1.0 + max(maxabs(g1), maxabs(g2)))

    def rate(slot: int, side: str, a: int, b: int, tau: complex) -> float:
        plus = _elementary_exp(n, a, b, tau * h)
        minus = _elementary_exp(n, a, b, -tau * h)
        if side == "left":
            hi_pt = DoublePoint(plus @ g1, g2) if slot == 0 else DoublePoint(g1, plus @ g2)
            lo_pt = DoublePoint(minus @ g1, g2) if slot == 0 else DoublePoint(g1, minus @ g2)
        else:
            hi_pt = DoublePoint(g1 @ plus, g2) if slot == 0 else DoublePoint(g1, g2 @ plus)
            lo_pt = DoublePoint(g1 @ minus, g2) if slot == 0 else DoublePoint(g1, g2 @ minus)
        return (fn(hi_pt) - fn(lo_pt)) / (2.0 * h)

    grads = []
    for side in ("left", "right"):
        comps = []
        for slot in (0, 1):
            re = np.empty((n, n))
            im = np.empty((n, n))
            for a in range(n):
                for b in range(n):
                    re[a, b] = rate(slot, side, a, b, 1.0)
                    im[a, b] = rate(slot, side, a, b, 1.0j)
            w = _dual_from_table(re, im)
            comps.append(w if slot == 0 else -w)
        grads.append(tuple(comps))
    return grads[0], grads[1]


def double_pb(sign: str, f: Callable[[DoublePoint], float],
              h: Callable[[DoublePoint], float], x: DoublePoint,
              step: float = FD_STEP) -> float:
    """Drinfeld ('minus') or Heisenberg ('plus') bracket at (g1, g2)."""
    if sign not in ("plus", "minus"):
        raise ValueError(f"unknown sign {sign!r}")
    df, dfp = double_gradients(f, x, step)
    dh, dhp = double_gradients(h, x, step)
    left = pairing2(df, rho(*dh))
    right = pairing2(dfp, rho(*dhp))
    return left + right if sign == "plus" else left - right


def psi_map(x: DoublePoint) -> PhasePoint:
    """Factorization map (g1, g2) -> (g, J).

    J = g1^{-1} g2 written as eta_> eta_0^2 eta_<, and g = g1^{-1} u with u
    the upper factor (including the diagonal square root) of the
    complementary factorization of g1 g2^{-1}.  Raises FactorizationError
    outside the factorization neighbourhood.
    """
    g1, g2 = x
    m_j = np.linalg.solve(g1, g2)
    up, d, low = udl(m_j)
    principal_sqrt_diagonal(d)
    j = (up * d[None, :]) @ low
    m_g = g1 @ np.linalg.inv(g2)
    up2, d2, _ = udl(m_g)
    e0 = principal_sqrt_diagonal(d2)
    g = np.linalg.solve(g1, up2 * e0[None, :])
    return PhasePoint(g, j)


def psi_inverse(y: PhasePoint) -> DoublePoint:
    """Left inverse of the factorization map, by re-solving the factorizations."""
    g, j = y
    ginv = np.linalg.inv(g)
    m = ginv @ np.linalg.inv(j) @ g
    low, d, up = ldu(m)
    e0 = principal_sqrt_diagonal(d)
    g1 = (e0[:, None] * up) @ ginv
    return DoublePoint(g1, g1 @ j)


def compose_with_psi(f: Observable) -> Callable[[DoublePoint], float]:
    """Pull an observable on (g, J) back to the double through psi."""
    return lambda x: f.value(psi_map(x))


def verify_transport(f: Observable, h: Observable, x: DoublePoint,
                     step: float = FD_STEP) -> float:
    """|{F,H}_2 at psi(x) - Heisenberg bracket of the pullbacks at x|."""
    from .brackets import pb2

    lhs = pb2(f, h, psi_map(x))
    rhs = double_pb("plus", compose_with_psi(f), compose_with_psi(h), x, step)
    return abs(lhs - rhs)


def transport_residuals(observables: Sequence[Observable],
                        pairs: Sequence[tuple[int, int]],
                        x: DoublePoint, step: float = FD_STEP):
    """Transport residuals for many observable pairs at one double point.

    The psi evaluations at the finite-difference probe points are shared
    across all observables, which keeps the cost linear in their number.
    """
    from .brackets import pb2

    g1, g2 = x
    n = g1.shape[0]
    h = step * (1.0 + max(maxabs(g1), maxabs(g2)))
    y = psi_map(x)

    probes = []  # (side, slot, a, b, tau) in a fixed order
    for side in ("left", "right"):
        for slot in (0, 1):
            for a in range(n):
                for b in range(n):
                    for tau in (1.0, 1.0j):
                        probes.append((side, slot, a, b, tau))

    probe_values = []
    for side, slot, a, b, tau in probes:
        plus = _elementary_exp(n, a, b, tau * h)
        minus = _elementary_exp(n, a, b, -tau * h)
        if side == "left":
            hi = DoublePoint(plus @ g1, g2) if slot == 0 else DoublePoint(g1, plus @ g2)
            lo = DoublePoint(minus @ g1, g2) if slot == 0 else DoublePoint(g1, minus @ g2)
        else:
            hi = DoublePoint(g1 @ plus, g2) if slot == 0 else DoublePoint(g1, g2 @ plus)
            lo = DoublePoint(g1 @ minus, g2) if slot == 0 else DoublePoint(g1, g2 @ minus)
        probe_values.append((psi_map(hi), psi_map(lo)))

    def gradients_of(obs: Observable):
        rates = [(obs.value(hi) - obs.value(lo)) / (2.0 * h)
                 for hi, lo in probe_values]
        idx = 0
        grads = []
        for side in ("left", "right"):
            comps = []
            for slot in (0, 1):
                re = np.empty((n, n))
                im = np.empty((n, n))
                for a in range(n):
                    for b in range(n):
                        re[a, b] = rates[idx]
                        im[a, b] = rates[idx + 1]
                        idx += 2
                w = _dual_from_table(re, im)
                comps.append(w if slot == 0 else -w)
            grads.append(tuple(comps))
        return grads[0], grads[1]

    cached = [gradients_of(obs) for obs in observables]
    out = []
    for i, k in pairs:
        df, dfp = cached[i]
        dh, dhp = cached[k]
        heis = pairing2(df, rho(*dh)) + pairing2(dfp, rho(*dhp))
        out.append(abs(pb2(observables[i], observables[k], y) - heis))
    return out
