"""Spectral flows on the (g, J) phase space and a generic integrator.

The Hamiltonians (1/k) Re tr(J^k) and (1/k) Im tr(J^k) generate flows with
closed-form solutions

    (g(t), J(t)) = (exp(J(0)^k t) g(0), J(0)),
    (g(t), J(t)) = (exp(-i J(0)^k t) g(0), J(0)),

each bi-Hamiltonian: the quadratic bracket with index k and the canonical
bracket with index k+1 drive the same motion.  The generic integrator
extracts the Hamiltonian vector field of any observable under either
bracket by pairing it with the coordinate evaluation functions and steps it
with the classical fourth-order scheme.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .brackets import (
    BracketSelector,
    pb1_from_bundles,
    pb2_from_bundles,
)
from .linalg import matrix_exp
from .observables import (
    Observable,
    PhasePoint,
    conjugate_momentum,
    g_entry,
    hamiltonian,
    momentum_component,
)


class FlowSpec(NamedTuple):
    """Parameters of one spectral flow: Hamiltonian index and family, the
    driving bracket, the time horizon and the integrator step count."""

    k: int
    kind: str
    bracket: BracketSelector
    t_final: float
    steps: int


def flow_spec(k: int, kind: str, bracket: BracketSelector, t_final: float,
              steps: int) -> FlowSpec:
    if k < 1:
        raise ValueError("k must be a positive integer")
    if kind not in ("real", "imag"):
        raise ValueError(f"unknown kind {kind!r}")
    if bracket.a != 0.0 and bracket.b != 0.0:
        raise ValueError("flow bracket must be canonical or quadratic")
    if not np.isfinite(t_final):
        raise ValueError("t_final must be finite")
    if steps < 1:
        raise ValueError("steps must be a positive integer")
    return FlowSpec(k, kind, bracket, float(t_final), steps)


def spectral_numeric_flow(x0: PhasePoint, spec: FlowSpec) -> PhasePoint:
    """Integrate the spectral Hamiltonian matching the spec's bracket: the
    canonical bracket drives index k+1, the quadratic one index k; both
    target the closed-form motion of index k."""
    index = spec.k + 1 if spec.bracket.a != 0.0 else spec.k
    return numeric_flow(x0, hamiltonian(index, spec.kind), spec.bracket,
                        spec.t_final, spec.steps)


def explicit_flow(x0: PhasePoint, k: int, kind: str, t: float) -> PhasePoint:
    """Closed-form flow of the spectral Hamiltonian of index k; J is frozen."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    g0, j0 = x0
    jk = np.linalg.matrix_power(j0, k)
    if kind == "real":
        u = matrix_exp(jk * t)
    elif kind == "imag":
        u = matrix_exp(-1j * jk * t)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return PhasePoint(u @ g0, j0.copy())


def _entry_observables(n: int):
    # Coordinate functions assembling gdot and Jdot entry by entry:
    # pairs (re, im) for every g entry, then for every J entry.
    g_coords = [(g_entry(a, b, "re", n), g_entry(a, b, "im", n))
                for a in range(n) for b in range(n)]
    j_coords = []
    for a in range(n):
        for b in range(n):
            e_re = np.zeros((n, n), dtype=complex)
            e_re[b, a] = 1.0
            e_im = np.zeros((n, n), dtype=complex)
            e_im[b, a] = -1.0j
            j_coords.append((momentum_component(e_re), momentum_component(e_im)))
    return g_coords, j_coords


def hamiltonian_vector_field(h: Observable, sel: BracketSelector, x: PhasePoint,
                             coords=None):
    """(gdot, Jdot) of the Hamiltonian vector field of h under the bracket."""
    n = x.g.shape[0]
    if coords is None:
        coords = _entry_observables(n)
    g_coords, j_coords = coords
    bh = h.bundle(x)

    def entry_rate(obs):
        bo = obs.bundle(x)
        out = 0.0
        if sel.a != 0.0:
            out += sel.a * pb1_from_bundles(bo, bh, x)
        if sel.b != 0.0:
            out += sel.b * pb2_from_bundles(bo, bh, x)
        return out

    gdot = np.empty((n, n), dtype=complex)
    jdot = np.empty((n, n), dtype=complex)
    idx = 0
    for a in range(n):
        for b in range(n):
            re_obs, im_obs = g_coords[idx]
            gdot[a, b] = entry_rate(re_obs) + 1j * entry_rate(im_obs)
            re_obs, im_obs = j_coords[idx]
            jdot[a, b] = entry_rate(re_obs) + 1j * entry_rate(im_obs)
            idx += 1
    return gdot, jdot


def numeric_flow(x0: PhasePoint, h: Observable, sel: BracketSelector,
                 t: float, steps: int) -> PhasePoint:
    """Classical fourth-order integration of the Hamiltonian vector field."""
    if steps < 1:
        raise ValueError("steps must be a positive integer")
    if sel.a != 0.0 and sel.b != 0.0:
        raise ValueError("numeric_flow expects the canonical or quadratic bracket")
    n = x0.g.shape[0]
    coords = _entry_observables(n)
    dt = t / steps
    g = x0.g.copy()
    j = x0.J.copy()
    for _ in range(steps):
        k1 = hamiltonian_vector_field(h, sel, PhasePoint(g, j), coords)
        k2 = hamiltonian_vector_field(
            h, sel, PhasePoint(g + 0.5 * dt * k1[0], j + 0.5 * dt * k1[1]), coords)
        k3 = hamiltonian_vector_field(
            h, sel, PhasePoint(g + 0.5 * dt * k2[0], j + 0.5 * dt * k2[1]), coords)
        k4 = hamiltonian_vector_field(
            h, sel, PhasePoint(g + dt * k3[0], j + dt * k3[1]), coords)
        g = g + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        j = j + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if not (np.all(np.isfinite(g.real)) and np.all(np.isfinite(j.real))):
            raise ValueError("integration step produced non-finite values")
    return PhasePoint(g, j)


def spectral_values(x: PhasePoint, n_max: int | None = None):
    """Values of (1/k) Re tr(J^k) and (1/k) Im tr(J^k) for k = 1..n_max."""
    n = x.g.shape[0] if n_max is None else n_max
    out = {}
    for k in range(1, n + 1):
        out[f"H_{k}"] = hamiltonian(k, "real").value(x)
        out[f"Ht_{k}"] = hamiltonian(k, "imag").value(x)
    return out


def conservation_report(trajectory) -> dict:
    """Max absolute drift of the spectral Hamiltonians and of -g^{-1} J g."""
    points = list(trajectory)
    if not points:
        raise ValueError("empty trajectory")
    n = points[0].g.shape[0]
    base = spectral_values(points[0], n)
    base_tilde = conjugate_momentum(points[0])
    drift = {name: 0.0 for name in base}
    drift["Jtilde"] = 0.0
    for x in points[1:]:
        vals = spectral_values(x, n)
        for name in base:
            drift[name] = max(drift[name], abs(vals[name] - base[name]))
        drift["Jtilde"] = max(
            drift["Jtilde"],
            float(np.max(np.abs(conjugate_momentum(x) - base_tilde))))
    return drift


def flow_error(x0: PhasePoint, k: int, kind: str, sel: BracketSelector,
               t: float, steps: int) -> float:
    """Distance between the integrator and the closed-form flow."""
    approx = spectral_numeric_flow(x0, flow_spec(k, kind, sel, t, steps))
    exact = explicit_flow(x0, k, kind, t)
    return float(max(np.max(np.abs(approx.g - exact.g)),
                     np.max(np.abs(approx.J - exact.J))))


def convergence_order(x0: PhasePoint, k: int, kind: str, sel: BracketSelector,
                      t: float, steps: int) -> float:
    """Observed order from one step-halving of the integrator error."""
    e1 = flow_error(x0, k, kind, sel, t, steps)
    e2 = flow_error(x0, k, kind, sel, t, 2 * steps)
    return float(np.log2(e1 / e2))
