"""The two compatible Poisson brackets on pairs (g, J).

The canonical bracket of the right-trivialized cotangent bundle is

    {F,H}_1 = <nabla1 F, d2 H> - <nabla1 H, d2 F> + <J, [d2 F, d2 H]>,

and the quadratic bracket transported from the Heisenberg double is

    {F,H}_2 = <r nabla1 F, nabla1 H> - <r nabla1' F, nabla1' H>
            + <nabla2 F - nabla2' F, r_+ nabla2' H - r_- nabla2 H>
            + <nabla1 F, r_+ nabla2' H - r_- nabla2 H>
            - <nabla1 H, r_+ nabla2' F - r_- nabla2 F>.

The canonical bracket is the Lie derivative of the quadratic one along the
unit shift J -> J + t I, which makes the pair compatible; both facts are
exposed here as computable quantities rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import comm, pairing, r_map, r_minus, r_plus
from .observables import (
    FuncObservable,
    GradientBundle,
    Observable,
    PhasePoint,
)


@dataclass(frozen=True)
class BracketSelector:
    """Linear combination a * {,}_1 + b * {,}_2."""

    a: float
    b: float

    def __post_init__(self):
        if self.a == 0.0 and self.b == 0.0:
            raise ValueError("bracket selector must be nonzero")


CANONICAL = BracketSelector(1.0, 0.0)
QUADRATIC = BracketSelector(0.0, 1.0)


def pb1_from_bundles(bf: GradientBundle, bh: GradientBundle, x: PhasePoint) -> float:
    return (pairing(bf.nabla1, bh.d2) - pairing(bh.nabla1, bf.d2)
            + pairing(x.J, comm(bf.d2, bh.d2)))


def pb2_from_bundles(bf: GradientBundle, bh: GradientBundle, x: PhasePoint) -> float:
    mix_h = r_plus(bh.nabla2_prime) - r_minus(bh.nabla2)
    mix_f = r_plus(bf.nabla2_prime) - r_minus(bf.nabla2)
    return (pairing(r_map(bf.nabla1), bh.nabla1)
            - pairing(r_map(bf.nabla1_prime), bh.nabla1_prime)
            + pairing(bf.nabla2 - bf.nabla2_prime, mix_h)
            + pairing(bf.nabla1, mix_h)
            - pairing(bh.nabla1, mix_f))


def pb1(f: Observable, h: Observable, x: PhasePoint) -> float:
    """Canonical Poisson bracket {F,H}_1 at x."""
    return pb1_from_bundles(f.bundle(x), h.bundle(x), x)


def pb2(f: Observable, h: Observable, x: PhasePoint) -> float:
    """Quadratic Poisson bracket {F,H}_2 at x."""
    return pb2_from_bundles(f.bundle(x), h.bundle(x), x)


def pb(sel: BracketSelector, f: Observable, h: Observable, x: PhasePoint) -> float:
    """Linear combination a * {F,H}_1 + b * {F,H}_2."""
    bf = f.bundle(x)
    bh = h.bundle(x)
    out = 0.0
    if sel.a != 0.0:
        out += sel.a * pb1_from_bundles(bf, bh, x)
    if sel.b != 0.0:
        out += sel.b * pb2_from_bundles(bf, bh, x)
    return out


def shift_derivation(f: Observable) -> Observable:
    """Observable D[F], the derivative of F along (g, J) -> (g, J + t I).

    Exact for trace-word observables and their sums and products; generic
    observables fall back to <d2 F, I> with finite-difference bundles.
    """
    return f.shift_derivative()


def lie_derivative_bracket(f: Observable, h: Observable, x: PhasePoint,
                           step: float = 1e-5) -> float:
    """D[{F,H}_2] - {D[F],H}_2 - {F,D[H]}_2 with the outer derivative by
    central differences along the unit shift."""
    g, j = x
    eye = np.eye(j.shape[0], dtype=complex)
    h_shift = step * (1.0 + float(np.max(np.abs(j))))
    outer = (pb2(f, h, PhasePoint(g, j + h_shift * eye))
             - pb2(f, h, PhasePoint(g, j - h_shift * eye))) / (2.0 * h_shift)
    return outer - pb2(shift_derivation(f), h, x) - pb2(f, shift_derivation(h), x)


def bracket_observable(sel: BracketSelector, f: Observable, h: Observable,
                       step: float = 1e-4) -> Observable:
    """The map x -> {F,H}(x) wrapped as an observable with FD gradients.

    The relatively large default step suppresses amplification of the noise
    carried by the inner bracket values.
    """
    return FuncObservable(lambda y: pb(sel, f, h, y), step=step)


def _pb_from_bundles(sel: BracketSelector, bf, bh, x: PhasePoint) -> float:
    out = 0.0
    if sel.a != 0.0:
        out += sel.a * pb1_from_bundles(bf, bh, x)
    if sel.b != 0.0:
        out += sel.b * pb2_from_bundles(bf, bh, x)
    return out


def jacobi_terms(sel: BracketSelector, f: Observable, g: Observable,
                 h: Observable, x: PhasePoint, step: float = 1e-4):
    """The three cyclic terms {{F,G},H}, {{G,H},F}, {{H,F},G} at x.

    The finite-difference probes of the three inner brackets share their
    probe points, so each probe costs one bundle per observable.
    """
    from .observables import finite_difference_bundles

    obs = (f, g, h)

    def inner_values(y):
        bs = [o.bundle(y) for o in obs]
        return (_pb_from_bundles(sel, bs[0], bs[1], y),
                _pb_from_bundles(sel, bs[1], bs[2], y),
                _pb_from_bundles(sel, bs[2], bs[0], y))

    inner_bundles = finite_difference_bundles(inner_values, x, 3, step)
    outer_bundles = [o.bundle(x) for o in obs]
    t1 = _pb_from_bundles(sel, inner_bundles[0], outer_bundles[2], x)
    t2 = _pb_from_bundles(sel, inner_bundles[1], outer_bundles[0], x)
    t3 = _pb_from_bundles(sel, inner_bundles[2], outer_bundles[1], x)
    return t1, t2, t3


def jacobi_residual(sel: BracketSelector, f: Observable, g: Observable,
                    h: Observable, x: PhasePoint, step: float = 1e-4) -> float:
    """Cyclic sum {{F,G},H} + {{G,H},F} + {{H,F},G} at x."""
    return float(sum(jacobi_terms(sel, f, g, h, x, step)))
