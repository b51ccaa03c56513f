"""Reduction of the (g, J) phase space by the two-sided unitary action.

Every regular point is equivalent to a slice point (e^q, J) with q real,
strictly decreasing, leaving a residual torus action J -> tau J tau^{-1}.
Torus-invariant functions f(q, J) carry two derivative objects: a diagonal
real gradient nabla1 f (q-derivatives) and a full matrix gradient d2 f.

The two Poisson brackets close on invariant functions and descend to the
slice.  With R(q) the entrywise coth(q_i - q_j) map, the left gradient of
the bi-invariant extension of f reconstructs as

    nabla1 F = [d2 f, J]^+ + nabla1 f + R(q) [d2 f, J]^+,

and substituting it into the upstairs formulas gives the two reduced
brackets implemented below, together with their Hamiltonian vector fields,
the restrictions to the Hermitian and anti-Hermitian slices (the hyperbolic
spin Sutherland hierarchy and its imaginary twin), and infinitesimal gauge
fields.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .linalg import (
    anti_part,
    as_complex_matrix,
    cartan_decompose,
    check_regular,
    comm,
    coth_map,
    herm_part,
    maxabs,
    pairing,
)
from .observables import (
    BOTH,
    FuncObservable,
    Observable,
    PhasePoint,
)

FD_STEP = 1e-5


class ReducedPoint(NamedTuple):
    """Slice point (q, J): q strictly decreasing real, J a complex matrix."""

    q: np.ndarray
    J: np.ndarray


def reduced_point(q, j) -> ReducedPoint:
    qv = check_regular(q)
    jm = as_complex_matrix(j)
    if jm.shape[0] != qv.size:
        raise ValueError("size mismatch between q and J")
    return ReducedPoint(qv, jm)


class TangentUpdate(NamedTuple):
    """Vector-field components: dq diagonal real, dJ a complex matrix."""

    dq: np.ndarray
    dJ: np.ndarray


def embed(y: ReducedPoint) -> PhasePoint:
    """Tautological embedding (q, J) -> (e^q, J)."""
    return PhasePoint(np.diag(np.exp(y.q)).astype(complex), y.J.copy())


def project_to_slice(x: PhasePoint) -> ReducedPoint:
    """Map (g, J) to (q, A^{-1} J A) through the gauge-fixed factorization."""
    factors = cartan_decompose(x.g)
    a = factors.a
    return ReducedPoint(factors.q, a.conj().T @ x.J @ a)


def torus_conjugate(y: ReducedPoint, tau: np.ndarray) -> ReducedPoint:
    """Residual torus action (q, J) -> (q, tau J tau^{-1}), tau diagonal unitary."""
    t = np.asarray(tau, dtype=complex)
    if t.ndim == 1:
        t = np.diag(t)
    return ReducedPoint(y.q.copy(), t @ y.J @ t.conj().T)


def diagonal_unitary(theta) -> np.ndarray:
    return np.diag(np.exp(1j * np.asarray(theta, dtype=float)))


class ReducedObservable:
    """Real function of a slice point with slice derivatives.

    nabla1 is the diagonal real gradient probing q only; d2 is the full
    matrix gradient probing J.  Both default to central differences.  When
    constructed with invariant=True the declared torus invariance is
    verified by random conjugation probes (a hard error on failure, since
    the reduced brackets satisfy the Jacobi identity only there).
    """

    def __init__(self, fn: Callable[[ReducedPoint], float], invariant: bool = False,
                 step: float = FD_STEP, check_seed: int | None = 0):
        self.fn = fn
        self.invariant = invariant
        self.step = step
        self._verified = False
        self._check_seed = check_seed

    def value(self, y: ReducedPoint) -> float:
        return float(self.fn(y))

    def verify_invariance(self, y: ReducedPoint, trials: int = 8,
                          tol: float = 1e-9) -> None:
        rng = np.random.default_rng(self._check_seed)
        base = self.value(y)
        for _ in range(trials):
            tau = diagonal_unitary(rng.uniform(0.0, 2.0 * np.pi, size=y.q.size))
            moved = self.value(torus_conjugate(y, tau))
            if abs(moved - base) > tol * (1.0 + abs(base)):
                raise ValueError("observable is not torus invariant")
        self._verified = True

    def _maybe_verify(self, y: ReducedPoint) -> None:
        if self.invariant and not self._verified:
            self.verify_invariance(y)

    def nabla1(self, y: ReducedPoint) -> np.ndarray:
        self._maybe_verify(y)
        h = self.step * (1.0 + maxabs(y.q))
        out = np.empty(y.q.size)
        for i in range(y.q.size):
            e = np.zeros(y.q.size)
            e[i] = h
            out[i] = (self.fn(ReducedPoint(y.q + e, y.J))
                      - self.fn(ReducedPoint(y.q - e, y.J))) / (2.0 * h)
        return out

    def d2(self, y: ReducedPoint) -> np.ndarray:
        self._maybe_verify(y)
        n = y.q.size
        h = self.step * (1.0 + maxabs(y.J))
        re = np.empty((n, n))
        im = np.empty((n, n))
        for a in range(n):
            for b in range(n):
                e = np.zeros((n, n), dtype=complex)
                e[a, b] = h
                re[a, b] = (self.fn(ReducedPoint(y.q, y.J + e))
                            - self.fn(ReducedPoint(y.q, y.J - e))) / (2.0 * h)
                im[a, b] = (self.fn(ReducedPoint(y.q, y.J + 1j * e))
                            - self.fn(ReducedPoint(y.q, y.J - 1j * e))) / (2.0 * h)
        return re.T - 1j * im.T


class SpectralReduced(ReducedObservable):
    """The commuting family (1/k) Re tr(J^k), (1/k) Im tr(J^k); exact gradients."""

    def __init__(self, k: int, kind: str = "real"):
        if k < 1:
            raise ValueError("k must be a positive integer")
        if kind not in ("real", "imag"):
            raise ValueError(f"unknown kind {kind!r}")
        self.k = k
        self.kind = kind
        super().__init__(self._eval, invariant=True)
        self._verified = True

    def _eval(self, y: ReducedPoint) -> float:
        t = np.trace(np.linalg.matrix_power(y.J, self.k)) / self.k
        return float(t.real if self.kind == "real" else t.imag)

    def nabla1(self, y: ReducedPoint) -> np.ndarray:
        return np.zeros(y.q.size)

    def d2(self, y: ReducedPoint) -> np.ndarray:
        p = np.linalg.matrix_power(y.J, self.k - 1)
        return p if self.kind == "real" else -1j * p


def extend_invariant(f: ReducedObservable) -> Observable:
    """Bi-invariant extension of a torus-invariant slice function."""
    if not f.invariant:
        raise ValueError("only torus-invariant functions extend")
    return FuncObservable(lambda x: f.value(project_to_slice(x)),
                          invariance=BOTH, step=f.step)


def lifted_gradient(f: ReducedObservable, y: ReducedPoint) -> np.ndarray:
    """Left gradient of the bi-invariant extension at (e^q, J), assembled
    from the slice derivatives: [d2 f, J]^+ + nabla1 f + R(q) [d2 f, J]^+."""
    c_plus = anti_part(comm(f.d2(y), y.J))
    return c_plus + np.diag(f.nabla1(y)).astype(complex) + coth_map(y.q, c_plus)


def _diag_herm(x: np.ndarray) -> np.ndarray:
    # Diagonal real part of the Hermitian component, as a vector.
    return np.real(np.diag(x))


def _red_pb1_terms(q, j, n1f, d2f, n1h, d2h) -> float:
    fp, fm = anti_part(d2f), herm_part(d2f)
    hp, hm = anti_part(d2h), herm_part(d2h)
    t1 = float(n1f @ _diag_herm(d2h) - n1h @ _diag_herm(d2f))
    t2 = (pairing(coth_map(q, anti_part(comm(d2f, j))), hm)
          - pairing(coth_map(q, anti_part(comm(d2h, j))), fm))
    t3 = pairing(anti_part(j), comm(fm, hm) - comm(fp, hp))
    return t1 + t2 + t3


def red_pb1(f: ReducedObservable, h: ReducedObservable, y: ReducedPoint) -> float:
    """First reduced bracket of torus-invariant slice functions."""
    return _red_pb1_terms(y.q, y.J, f.nabla1(y), f.d2(y), h.nabla1(y), h.d2(y))


def _red_pb2_terms(q, j, n1f, d2f, n1h, d2h) -> float:
    n2f, n2pf = j @ d2f, d2f @ j
    n2h, n2ph = j @ d2h, d2h @ j
    sym_f = n2f + n2pf
    sym_h = n2h + n2ph
    t1 = float(n1f @ _diag_herm(sym_h) - n1h @ _diag_herm(sym_f))
    t2 = (pairing(coth_map(q, anti_part(comm(d2f, j))), herm_part(sym_h))
          - pairing(coth_map(q, anti_part(comm(d2h, j))), herm_part(sym_f)))
    t3 = (pairing(herm_part(n2f), herm_part(n2ph))
          + pairing(anti_part(n2pf), anti_part(n2h))
          - pairing(herm_part(n2pf), herm_part(n2h))
          - pairing(anti_part(n2f), anti_part(n2ph)))
    return (t1 + t2 + t3) / 2.0


def red_pb2(f: ReducedObservable, h: ReducedObservable, y: ReducedPoint) -> float:
    """Second reduced bracket of torus-invariant slice functions."""
    return _red_pb2_terms(y.q, y.J, f.nabla1(y), f.d2(y), h.nabla1(y), h.d2(y))


def red_pb(sel, f: ReducedObservable, h: ReducedObservable, y: ReducedPoint) -> float:
    out = 0.0
    if sel.a != 0.0:
        out += sel.a * red_pb1(f, h, y)
    if sel.b != 0.0:
        out += sel.b * red_pb2(f, h, y)
    return out


def red_pb1_spectral(f: ReducedObservable, h: SpectralReduced,
                     y: ReducedPoint) -> float:
    """First reduced bracket against a spectral Hamiltonian, short form:
    <nabla1 f, (d2 h)_0^-> + <d2 f, [R(q)(d2 h)^- - (d2 h)^+, J]>."""
    p = h.d2(y)
    return float(f.nabla1(y) @ _diag_herm(p)) + pairing(
        f.d2(y), comm(coth_map(y.q, herm_part(p)) - anti_part(p), y.J))


def red_pb2_spectral(f: ReducedObservable, h: SpectralReduced,
                     y: ReducedPoint) -> float:
    """Second reduced bracket against a spectral Hamiltonian, short form,
    with J d2 h in place of d2 h."""
    w = y.J @ h.d2(y)
    return float(f.nabla1(y) @ _diag_herm(w)) + pairing(
        f.d2(y), comm(coth_map(y.q, herm_part(w)) - anti_part(w), y.J))


def reduced_vector_field(h: ReducedObservable, bracket: str,
                         y: ReducedPoint) -> TangentUpdate:
    """Hamiltonian vector field of h on the slice, gauge fixed so that
    <nabla1 f, dq> + <d2 f, dJ> reproduces the reduced bracket for all f."""
    q, j = y
    d2h = h.d2(y)
    n1h = np.diag(h.nabla1(y)).astype(complex)
    hp, hm = anti_part(d2h), herm_part(d2h)
    jp, jm = anti_part(j), herm_part(j)
    if bracket == "canonical":
        dq = _diag_herm(d2h)
        djm = (-n1h + comm(hm, jp) + coth_map(q, anti_part(comm(j, d2h)))
               + comm(coth_map(q, hm), jm))
        djp = comm(coth_map(q, hm) - hp, jp)
    elif bracket == "quadratic":
        dq = _diag_herm(jm @ hm + jp @ hp)
        inner = coth_map(q, hm @ jm + hp @ jp)
        djm = herm_part(2.0 * jm @ hm @ jp - 2.0 * jm @ inner - n1h @ jm)
        djp = anti_part(2.0 * jp @ hp @ jm - 2.0 * jp @ inner - n1h @ jp)
    else:
        raise ValueError(f"unknown bracket {bracket!r}")
    return TangentUpdate(dq, djm + djp)


def field_pairing(f: ReducedObservable, field: TangentUpdate,
                  y: ReducedPoint) -> float:
    """Derivative of f along a tangent update: <nabla1 f, dq> + <d2 f, dJ>."""
    return float(f.nabla1(y) @ field.dq) + pairing(f.d2(y), field.dJ)


def power_flow_field(k: int, kind: str, y: ReducedPoint) -> TangentUpdate:
    """Closed form of the spectral vector fields on the slice.

    The quadratic bracket with Hamiltonian index k and the canonical bracket
    with index k+1 both give, for kind 'real',

        dq_j = Re(J^k)_jj,   dJ = [R(q)(J^k)^- - (J^k)^+, J],

    and the 'imag' family replaces J^k by -i J^k in the split parts.
    """
    p = np.linalg.matrix_power(y.J, k)
    if kind == "imag":
        p = -1j * p
    elif kind != "real":
        raise ValueError(f"unknown kind {kind!r}")
    dq = np.real(np.diag(p))
    dj = comm(coth_map(y.q, herm_part(p)) - anti_part(p), y.J)
    return TangentUpdate(dq, dj)


def restrict_minus(y: ReducedPoint, tol: float = 1e-10) -> ReducedPoint:
    """Restrict to the Hermitian slice; errors on a non-Hermitian J."""
    if maxabs(anti_part(y.J)) > tol * (1.0 + maxabs(y.J)):
        raise ValueError("J is not Hermitian: cannot restrict")
    return ReducedPoint(y.q.copy(), herm_part(y.J))


def restrict_plus(y: ReducedPoint, tol: float = 1e-10) -> ReducedPoint:
    """Restrict to the anti-Hermitian slice; errors on a non-anti-Hermitian J."""
    if maxabs(herm_part(y.J)) > tol * (1.0 + maxabs(y.J)):
        raise ValueError("J is not anti-Hermitian: cannot restrict")
    return ReducedPoint(y.q.copy(), anti_part(y.J))


def hermitian_flow_field(k: int, bracket: str, y: ReducedPoint) -> TangentUpdate:
    """Spin Sutherland fields on the Hermitian slice:

        dq_j = ((J^-)^k)_jj,    dJ^- = [R(q)(J^-)^k, J^-],

    generated by the quadratic bracket at index k and the canonical bracket
    at index k+1.  The 'imag' family vanishes identically here.
    """
    y = restrict_minus(y)
    if bracket == "quadratic":
        power = k
    elif bracket == "canonical":
        power = k - 1
    else:
        raise ValueError(f"unknown bracket {bracket!r}")
    if k < 1 or power < 0:
        raise ValueError("k must be a positive integer")
    p = np.linalg.matrix_power(y.J, power)
    return TangentUpdate(np.real(np.diag(p)), comm(coth_map(y.q, p), y.J))


def antihermitian_flow_field(k: int, kind: str, bracket: str,
                             y: ReducedPoint) -> TangentUpdate:
    """Restricted fields on the anti-Hermitian slice; half of them vanish.

    With J anti-Hermitian and index parity deciding survival:
    the 'real' family is nonzero only for even quadratic / odd canonical
    indices, with power p = k (quadratic) or k-1 (canonical),

        dq_j = Re(J^p)_jj,  dJ = [R(q) J^p, J],

    and the 'imag' family is nonzero for odd quadratic / even canonical
    indices with J^p replaced by -i J^p.
    """
    y = restrict_plus(y)
    if bracket == "quadratic":
        power = k
    elif bracket == "canonical":
        power = k - 1
    else:
        raise ValueError(f"unknown bracket {bracket!r}")
    if k < 1 or power < 0:
        raise ValueError("k must be a positive integer")
    zero = TangentUpdate(np.zeros(y.q.size), np.zeros_like(y.J))
    if kind == "real":
        if power % 2 == 1:
            return zero
        p = np.linalg.matrix_power(y.J, power)
    elif kind == "imag":
        if power % 2 == 0:
            return zero
        p = -1j * np.linalg.matrix_power(y.J, power)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return TangentUpdate(np.real(np.diag(p)), comm(coth_map(y.q, p), y.J))


def gauge_field(t_fn: Callable[[ReducedPoint], np.ndarray],
                y: ReducedPoint) -> TangentUpdate:
    """Infinitesimal gauge transformation: dq = 0, dJ = [T(y), J] with T
    diagonal anti-Hermitian.  Annihilates every torus-invariant function."""
    t = np.asarray(t_fn(y), dtype=complex)
    if t.ndim == 1:
        t = np.diag(t)
    if maxabs(t - np.diag(np.diag(t))) > 1e-12 * (1.0 + maxabs(t)) or \
            maxabs(np.real(np.diag(t))) > 1e-12 * (1.0 + maxabs(t)):
        raise ValueError("gauge generator must be diagonal anti-Hermitian")
    return TangentUpdate(np.zeros(y.q.size), comm(t, y.J))


# ---------------------------------------------------------------------------
# The Hermitian slice carries the hyperbolic spin Sutherland brackets.
# ---------------------------------------------------------------------------


class SliceObservable:
    """Real function of (q, J^-) with J^- Hermitian; slice derivatives.

    d2 lives in the Hermitian subspace and is assembled from probes along
    the Hermitian basis only.
    """

    def __init__(self, fn: Callable[[ReducedPoint], float], invariant: bool = False,
                 step: float = FD_STEP):
        self.fn = fn
        self.invariant = invariant
        self.step = step

    def value(self, y: ReducedPoint) -> float:
        return float(self.fn(y))

    def nabla1(self, y: ReducedPoint) -> np.ndarray:
        h = self.step * (1.0 + maxabs(y.q))
        out = np.empty(y.q.size)
        for i in range(y.q.size):
            e = np.zeros(y.q.size)
            e[i] = h
            out[i] = (self.fn(ReducedPoint(y.q + e, y.J))
                      - self.fn(ReducedPoint(y.q - e, y.J))) / (2.0 * h)
        return out

    def d2(self, y: ReducedPoint) -> np.ndarray:
        n = y.q.size
        h = self.step * (1.0 + maxabs(y.J))

        def rate(direction):
            return (self.fn(ReducedPoint(y.q, y.J + h * direction))
                    - self.fn(ReducedPoint(y.q, y.J - h * direction))) / (2.0 * h)

        w = np.zeros((n, n), dtype=complex)
        for a in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[a, a] = 1.0
            w[a, a] = rate(e)
            for b in range(a + 1, n):
                sym = np.zeros((n, n), dtype=complex)
                sym[a, b] = sym[b, a] = 1.0
                skew = np.zeros((n, n), dtype=complex)
                skew[a, b] = 1.0j
                skew[b, a] = -1.0j
                w[a, b] = 0.5 * (rate(sym) + 1j * rate(skew))
                w[b, a] = np.conj(w[a, b])
        return w

    def as_reduced(self) -> ReducedObservable:
        """Same function read through (q, J) -> (q, (J + J^*)/2)."""
        return ReducedObservable(
            lambda y: self.fn(ReducedPoint(y.q, herm_part(y.J))),
            invariant=self.invariant, step=self.step)


def minus_pb1(f: SliceObservable, h: SliceObservable, y: ReducedPoint) -> float:
    """First bracket of the spin Sutherland hierarchy on the Hermitian slice:

        <nabla1 F, d2 H> - <nabla1 H, d2 F>
        + <J^-, [R(q) d2 F, d2 H] + [d2 F, R(q) d2 H]>.
    """
    y = restrict_minus(y)
    d2f, d2h = f.d2(y), h.d2(y)
    t1 = float(f.nabla1(y) @ np.real(np.diag(d2h))
               - h.nabla1(y) @ np.real(np.diag(d2f)))
    t2 = pairing(y.J, comm(coth_map(y.q, d2f), d2h) + comm(d2f, coth_map(y.q, d2h)))
    return t1 + t2


def minus_pb2(f: SliceObservable, h: SliceObservable, y: ReducedPoint) -> float:
    """Second bracket on the Hermitian slice:

        <nabla1 F, J^- d2 H> - <nabla1 H, J^- d2 F>
        + 2 <J^- d2 F, R(q) J^- d2 H>.
    """
    y = restrict_minus(y)
    n2f = y.J @ f.d2(y)
    n2h = y.J @ h.d2(y)
    t1 = float(f.nabla1(y) @ _diag_herm(n2h) - h.nabla1(y) @ _diag_herm(n2f))
    return t1 + 2.0 * pairing(n2f, coth_map(y.q, n2h))


def reduced_bracket_observable(sel, f: ReducedObservable, h: ReducedObservable,
                               step: float = 1e-4) -> ReducedObservable:
    """The map y -> reduced bracket value, wrapped for nested differentiation."""
    return ReducedObservable(lambda y: red_pb(sel, f, h, y),
                             invariant=False, step=step)


def reduced_jacobi_terms(sel, f, g, h, y: ReducedPoint, step: float = 1e-4):
    t1 = red_pb(sel, reduced_bracket_observable(sel, f, g, step), h, y)
    t2 = red_pb(sel, reduced_bracket_observable(sel, g, h, step), f, y)
    t3 = red_pb(sel, reduced_bracket_observable(sel, h, f, step), g, y)
    return t1, t2, t3


def integrate_reduced(h: ReducedObservable, bracket: str, y0: ReducedPoint,
                      t: float, steps: int) -> ReducedPoint:
    """Classical fourth-order integration of the reduced vector field."""
    if steps < 1:
        raise ValueError("steps must be a positive integer")
    dt = t / steps
    q = y0.q.copy()
    j = y0.J.copy()
    for _ in range(steps):
        y = ReducedPoint(q, j)
        k1 = reduced_vector_field(h, bracket, y)
        k2 = reduced_vector_field(h, bracket, ReducedPoint(
            q + 0.5 * dt * k1.dq, j + 0.5 * dt * k1.dJ))
        k3 = reduced_vector_field(h, bracket, ReducedPoint(
            q + 0.5 * dt * k2.dq, j + 0.5 * dt * k2.dJ))
        k4 = reduced_vector_field(h, bracket, ReducedPoint(
            q + dt * k3.dq, j + dt * k3.dJ))
        q = q + dt / 6.0 * (k1.dq + 2 * k2.dq + 2 * k3.dq + k4.dq)
        j = j + dt / 6.0 * (k1.dJ + 2 * k2.dJ + 2 * k3.dJ + k4.dJ)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(j.real))):
            raise ValueError("integration step produced non-finite values")
    return ReducedPoint(q, j)
