import numpy as np
import pytest

from bihamkit.linalg import haar_unitary, pairing
from bihamkit.observables import (
    PhasePoint,
    basis_matrix,
    conjugate_momentum,
    fd_check_bundle,
    finite_difference_bundle,
    g_entry,
    hamiltonian,
    momentum_component,
    parse_observable,
    phase_point,
    trace_word,
    verify_invariance,
)
from bihamkit.sampling import (
    random_bi_invariant_observable,
    random_coordinate_observable,
    random_left_invariant_observable,
    random_phase_point,
    random_right_invariant_observable,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20)


@pytest.fixture
def point(rng):
    return random_phase_point(rng, 3)


def test_phase_point_validation():
    with pytest.raises(ValueError):
        phase_point(np.zeros((2, 2)), np.eye(2))
    with pytest.raises(ValueError):
        phase_point(np.eye(2), np.eye(3))
    x = phase_point(np.eye(2), 1j * np.eye(2))
    assert x.g.shape == (2, 2)


def test_hamiltonian_values(point):
    n = 3
    x = PhasePoint(point.g, np.eye(n, dtype=complex))
    assert hamiltonian(1).value(x) == pytest.approx(n)
    x2 = PhasePoint(np.eye(2, dtype=complex), np.diag([1.0, 1.0j]))
    assert hamiltonian(2).value(x2) == pytest.approx(0.0)
    x3 = PhasePoint(point.g, 1j * np.eye(n))
    assert hamiltonian(1, "imag").value(x3) == pytest.approx(n)


def test_spectral_gradients(point):
    for k in (1, 2, 3):
        b = hamiltonian(k, "real").bundle(point)
        assert np.allclose(b.d2, np.linalg.matrix_power(point.J, k - 1))
        assert np.allclose(b.nabla1, 0) and np.allclose(b.nabla1_prime, 0)
        bt = hamiltonian(k, "imag").bundle(point)
        assert np.allclose(bt.d2, -1j * np.linalg.matrix_power(point.J, k - 1))


def test_momentum_component_gradient(point):
    t = basis_matrix(1, 3)  # E_12
    b = momentum_component(t).bundle(point)
    assert np.allclose(b.d2, t)
    # the value pairs the basis element against J
    assert momentum_component(t).value(point) == pytest.approx(pairing(t, point.J))


def test_bundle_consistency_relations(rng, point):
    for _ in range(10):
        obs = random_coordinate_observable(rng, 3)
        b = obs.bundle(point)
        assert np.allclose(b.nabla2, point.J @ b.d2)
        assert np.allclose(b.nabla2_prime, b.d2 @ point.J)
        recon = point.g @ b.nabla1_prime @ np.linalg.inv(point.g)
        assert np.max(np.abs(b.nabla1 - recon)) < 1e-10 * (1.0 + np.max(np.abs(b.nabla1)))


def test_analytic_vs_finite_difference(rng):
    for n in (2, 3):
        x = random_phase_point(rng, n)
        for maker in (lambda: hamiltonian(2), lambda: hamiltonian(3, "imag"),
                      lambda: g_entry(0, 1, "im", n),
                      lambda: momentum_component(basis_matrix(n, n)),
                      lambda: trace_word([("+", 1), ("-", 1)]),
                      lambda: trace_word([("-", 2)], "imag", tilde=True),
                      lambda: random_coordinate_observable(rng, n),
                      lambda: random_right_invariant_observable(rng, n),
                      lambda: random_left_invariant_observable(rng, n)):
            obs = maker()
            assert fd_check_bundle(obs, x) < 1e-6


def test_observable_algebra(rng, point):
    f = hamiltonian(2)
    g = g_entry(1, 0, "re", 3)
    combo = 2.0 * f + f * g - 1.5
    want = 2.0 * f.value(point) + f.value(point) * g.value(point) - 1.5
    assert combo.value(point) == pytest.approx(want)
    assert fd_check_bundle(combo, point) < 1e-6


def test_conjugate_momentum(rng, point):
    x = PhasePoint(np.eye(3, dtype=complex), point.J)
    assert np.allclose(conjugate_momentum(x), -point.J)
    # trace relations against the sign-flipped conjugated matrix
    jt = conjugate_momentum(point)
    for k in range(1, 4):
        lhs = np.trace(np.linalg.matrix_power(point.J, k))
        rhs = (-1.0) ** k * np.trace(np.linalg.matrix_power(jt, k))
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_trace_word_values(point):
    herm = (point.J + point.J.conj().T) / 2.0
    x = PhasePoint(point.g, herm)
    assert trace_word([("-", 1)]).value(x) == pytest.approx(np.trace(herm).real)
    x2 = PhasePoint(point.g, (1.0 + 1.0j) * np.eye(3))
    assert trace_word([("+", 1), ("-", 1)]).value(x2) == pytest.approx(0.0)


def test_trace_word_invariance(rng, point):
    w = trace_word([("+", 1), ("-", 2)], "imag")
    assert verify_invariance(w, point, rng)
    g, j = point
    base = w.value(point)
    for _ in range(20):
        eta_l = haar_unitary(rng, 3)
        eta_r = haar_unitary(rng, 3)
        moved = w.value(PhasePoint(eta_l @ g @ eta_r.conj().T,
                                   eta_l @ j @ eta_l.conj().T))
        assert moved == pytest.approx(base, abs=1e-10)


def test_one_sided_invariance(rng, point):
    right = random_right_invariant_observable(rng, 3)
    left = random_left_invariant_observable(rng, 3)
    assert verify_invariance(right, point, rng)
    assert verify_invariance(left, point, rng)
    g, j = point
    eta = haar_unitary(rng, 3)
    # right-invariant families genuinely break under the left action
    assert abs(right.value(PhasePoint(eta @ g, eta @ j @ eta.conj().T))
               - right.value(point)) > 1e-6
    assert abs(left.value(PhasePoint(g @ eta.conj().T, j))
               - left.value(point)) > 1e-6


def test_invariance_gradient_characterizations(rng, point):
    from bihamkit.linalg import anti_part

    right = random_right_invariant_observable(rng, 3)
    b = right.bundle(point)
    # right invariance forces the right derivative into the Hermitian part
    assert np.max(np.abs(anti_part(b.nabla1_prime))) < 1e-12
    left = random_left_invariant_observable(rng, 3)
    bl = left.bundle(point)
    gap = anti_part(bl.nabla1) - anti_part(bl.nabla2_prime - bl.nabla2)
    assert np.max(np.abs(gap)) < 1e-12


def test_shift_derivative_exactness(rng, point):
    f = hamiltonian(2)
    d = f.shift_derivative()
    assert d.value(point) == pytest.approx(hamiltonian(1).value(point))
    # finite-difference confirmation along the unit shift
    eye = np.eye(3, dtype=complex)
    h = 1e-6
    fd = (f.value(PhasePoint(point.g, point.J + h * eye))
          - f.value(PhasePoint(point.g, point.J - h * eye))) / (2 * h)
    assert d.value(point) == pytest.approx(fd, abs=1e-8)


def test_finite_difference_bundle_duality(point):
    # d2 of J -> Re J_12 must be E_21 by the pairing duality
    def f(x):
        return float(x.J[0, 1].real)

    b = finite_difference_bundle(f, point)
    want = np.zeros((3, 3), dtype=complex)
    want[1, 0] = 1.0
    assert np.max(np.abs(b.d2 - want)) < 1e-9


def test_parse_observable(point):
    n = 3
    assert parse_observable("H:2", n).value(point) == pytest.approx(
        hamiltonian(2).value(point))
    assert parse_observable("Htilde:1", n).value(point) == pytest.approx(
        np.trace(point.J).imag)
    assert parse_observable("gr:1,2", n).value(point) == pytest.approx(
        point.g[0, 1].real)
    assert parse_observable("gi:3,3", n).value(point) == pytest.approx(
        point.g[2, 2].imag)
    jk = parse_observable("Jk:1,2,re", n)
    assert jk.value(point) == pytest.approx(point.J[1, 0].real)
    w = parse_observable("word:+1-2,im", n)
    assert w.value(point) == pytest.approx(
        trace_word([("+", 1), ("-", 2)], "imag").value(point))
    with pytest.raises(ValueError):
        parse_observable("nope:1", n)
    with pytest.raises(ValueError):
        parse_observable("word:17", n)


def test_bi_invariant_family(rng, point):
    obs = random_bi_invariant_observable(rng, 3)
    assert verify_invariance(obs, point, rng)
    assert fd_check_bundle(obs, point) < 1e-6
