import numpy as np
import pytest

from bihamkit.brackets import CANONICAL, QUADRATIC, pb1, pb2
from bihamkit.flows import (
    conservation_report,
    convergence_order,
    explicit_flow,
    flow_error,
    flow_spec,
    hamiltonian_vector_field,
    numeric_flow,
    spectral_numeric_flow,
)
from bihamkit.observables import PhasePoint, hamiltonian
from bihamkit.sampling import random_phase_point
from bihamkit.verify import flow_test_point


@pytest.fixture
def rng():
    return np.random.default_rng(40)


def test_explicit_flow_fixed_points(rng):
    x0 = random_phase_point(rng, 3)
    frozen = PhasePoint(x0.g, np.zeros((3, 3), dtype=complex))
    moved = explicit_flow(frozen, 1, "real", 2.7)
    assert np.allclose(moved.g, frozen.g)
    assert np.allclose(moved.J, 0)

    unit = PhasePoint(x0.g, np.eye(3, dtype=complex))
    rotated = explicit_flow(unit, 1, "imag", 0.9)
    assert np.max(np.abs(rotated.g - np.exp(-0.9j) * x0.g)) < 1e-12
    assert np.array_equal(rotated.J, unit.J)


def test_explicit_flow_group_law(rng):
    x0 = random_phase_point(rng, 3, j_scale=0.6)
    for k, kind in ((1, "real"), (2, "imag")):
        ab = explicit_flow(explicit_flow(x0, k, kind, 0.8), k, kind, 0.5)
        direct = explicit_flow(x0, k, kind, 1.3)
        assert np.max(np.abs(ab.g - direct.g)) < 1e-12 * max(1.0, np.max(np.abs(direct.g)))


def test_conservation_on_explicit_trajectory(rng):
    x0 = flow_test_point(rng, 3, 2)
    traj = [explicit_flow(x0, 2, "real", t) for t in np.linspace(0.0, 10.0, 11)]
    drift = conservation_report(traj)
    assert max(drift.values()) < 1e-12


def test_conservation_constant_trajectory(rng):
    x0 = random_phase_point(rng, 2)
    drift = conservation_report([x0, x0, x0])
    assert max(drift.values()) == 0.0
    with pytest.raises(ValueError):
        conservation_report([])


def test_vector_field_matches_explicit_rate(rng):
    # the extracted field at t = 0 equals the time derivative of the flow
    x0 = random_phase_point(rng, 2, j_scale=0.7)
    k = 1
    gdot, jdot = hamiltonian_vector_field(hamiltonian(k + 1), CANONICAL, x0)
    want_gdot = np.linalg.matrix_power(x0.J, k) @ x0.g
    assert np.max(np.abs(gdot - want_gdot)) < 1e-11
    assert np.max(np.abs(jdot)) < 1e-11
    gdot2, jdot2 = hamiltonian_vector_field(hamiltonian(k), QUADRATIC, x0)
    assert np.max(np.abs(gdot2 - want_gdot)) < 1e-11
    assert np.max(np.abs(jdot2)) < 1e-11


def test_numeric_flow_zero_time(rng):
    x0 = random_phase_point(rng, 2)
    out = numeric_flow(x0, hamiltonian(2), CANONICAL, 0.0, 3)
    assert np.array_equal(out.g, x0.g)
    assert np.array_equal(out.J, x0.J)
    with pytest.raises(ValueError):
        numeric_flow(x0, hamiltonian(2), CANONICAL, 1.0, 0)


def test_numeric_matches_explicit_both_brackets(rng):
    x0 = random_phase_point(rng, 2, j_scale=0.8)
    for kind in ("real", "imag"):
        e_canon = flow_error(x0, 1, kind, CANONICAL, 1.0, 24)
        e_quad = flow_error(x0, 1, kind, QUADRATIC, 1.0, 24)
        assert e_canon < 1e-5
        assert e_quad < 1e-5


def test_numeric_flow_fourth_order(rng):
    x0 = random_phase_point(rng, 2, j_scale=0.8)
    for sel in (CANONICAL, QUADRATIC):
        order = convergence_order(x0, 1, "real", sel, 1.0, 8)
        assert abs(order - 4.0) <= 0.3


def test_numeric_flow_drift_shrinks_sixteenfold(rng):
    # spectral Hamiltonians freeze J under the integrator exactly, so use a
    # non-spectral invariant whose flow genuinely moves J while conserving
    # the spectral family
    from bihamkit.observables import trace_word

    x0 = random_phase_point(rng, 2, j_scale=0.9)
    h = trace_word([("+", 1), ("-", 2)], "imag")

    def drift(steps):
        traj = [x0] + [numeric_flow(x0, h, CANONICAL, t, steps)
                       for t in (0.5, 1.0)]
        return max(conservation_report(traj).values())

    d1, d2 = drift(8), drift(16)
    assert d1 > 1e-9  # the drift is resolvable, not machine noise
    assert d1 / d2 == pytest.approx(16.0, rel=0.5)


def test_flow_spec_validation(rng):
    spec = flow_spec(1, "real", CANONICAL, 2.0, 10)
    x0 = random_phase_point(rng, 2, j_scale=0.6)
    out = spectral_numeric_flow(x0, spec)
    want = explicit_flow(x0, 1, "real", 2.0)
    assert np.max(np.abs(out.g - want.g)) < 1e-4
    with pytest.raises(ValueError):
        flow_spec(0, "real", CANONICAL, 1.0, 10)
    with pytest.raises(ValueError):
        flow_spec(1, "other", CANONICAL, 1.0, 10)
    with pytest.raises(ValueError):
        flow_spec(1, "real", CANONICAL, np.inf, 10)
    with pytest.raises(ValueError):
        flow_spec(1, "real", CANONICAL, 1.0, 0)
    from bihamkit.brackets import BracketSelector
    with pytest.raises(ValueError):
        flow_spec(1, "real", BracketSelector(1.0, 1.0), 1.0, 10)


def test_involutivity(rng):
    for n in (2, 3):
        x = random_phase_point(rng, n)
        fams = [hamiltonian(k, kind) for k in range(1, n + 1)
                for kind in ("real", "imag")]
        for i, f in enumerate(fams):
            for h in fams[i:]:
                for br in (pb1, pb2):
                    assert abs(br(f, h, x)) < 1e-10


def test_functional_relations_along_flow(rng):
    from bihamkit.observables import conjugate_momentum

    x0 = flow_test_point(rng, 3, 1)
    for t in (0.0, 3.0, 10.0):
        x = explicit_flow(x0, 1, "real", t)
        jt = conjugate_momentum(x)
        for k in range(1, 4):
            lhs = np.trace(np.linalg.matrix_power(x.J, k))
            rhs = (-1.0) ** k * np.trace(np.linalg.matrix_power(jt, k))
            assert abs(lhs.real - rhs.real) < 1e-12
            assert abs(lhs.imag - rhs.imag) < 1e-12
