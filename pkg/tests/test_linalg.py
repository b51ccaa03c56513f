import numpy as np
import pytest
import scipy.linalg

from bihamkit.linalg import (
    FactorizationError,
    IrregularPointError,
    adq_apply,
    anti_part,
    cartan_decompose,
    cartan_reconstruct,
    comm,
    coth_map,
    haar_unitary,
    herm_part,
    hermitian_split,
    ldu,
    matrix_exp,
    pairing,
    principal_sqrt_diagonal,
    r_map,
    r_minus,
    r_plus,
    triangular_split,
    udl,
)


def rand_c(rng, n, scale=1.0):
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def test_triangular_split_example():
    up, diag, low = triangular_split([[1, 2], [3, 4]])
    assert np.array_equal(up, [[0, 2], [0, 0]])
    assert np.array_equal(diag, [[1, 0], [0, 4]])
    assert np.array_equal(low, [[0, 0], [3, 0]])


def test_triangular_split_identity_and_recombine():
    up, diag, low = triangular_split(np.eye(3))
    assert np.all(up == 0) and np.all(low == 0)
    assert np.array_equal(diag, np.eye(3))
    rng = np.random.default_rng(0)
    x = rand_c(rng, 4)
    parts = triangular_split(x)
    assert np.array_equal(sum(parts), x)
    # idempotence per component
    for i, p in enumerate(parts):
        again = triangular_split(p)
        assert np.array_equal(again[i], p)


def test_hermitian_split():
    x = np.array([[1.0, 2.0 - 1j], [2.0 + 1j, -3.0]])
    anti, herm = hermitian_split(x)
    assert np.allclose(anti, 0)
    assert np.allclose(herm, x)
    anti, herm = hermitian_split(1j * np.eye(2))
    assert np.allclose(anti, 1j * np.eye(2))
    assert np.allclose(herm, 0)
    rng = np.random.default_rng(1)
    y = rand_c(rng, 3)
    anti, herm = hermitian_split(y)
    assert np.allclose(anti + herm, y)
    # the two parts are orthogonal for the trace pairing
    assert abs(pairing(anti, herm)) < 1e-12
    # idempotence per component
    assert np.array_equal(hermitian_split(anti)[0], anti)
    assert np.array_equal(hermitian_split(herm)[1], herm)


def test_pairing_values():
    assert pairing(np.eye(3), np.eye(3)) == pytest.approx(3.0)
    assert pairing(1j * np.eye(3), 1j * np.eye(3)) == pytest.approx(-3.0)
    e12 = np.zeros((2, 2))
    e12[0, 1] = 1.0
    assert pairing(e12, e12.T) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        pairing(np.eye(2), np.eye(3))


def test_pairing_symmetries():
    rng = np.random.default_rng(2)
    x, y = rand_c(rng, 3), rand_c(rng, 3)
    assert pairing(x, y) == pytest.approx(pairing(y, x))
    assert pairing(x.conj().T, y.conj().T) == pytest.approx(pairing(x, y))


def test_r_map_values():
    assert np.allclose(r_map(np.diag([1.0, 2.0, 3.0])), 0)
    x = np.array([[0.0, 2.0], [3.0, 0.0]])
    assert np.allclose(r_map(x), [[0.0, 1.0], [-1.5, 0.0]])


def test_r_map_antisymmetry_and_exchange():
    rng = np.random.default_rng(3)
    for n in (2, 3, 4):
        x, y = rand_c(rng, n), rand_c(rng, n)
        assert abs(pairing(r_map(x), y) + pairing(x, r_map(y))) < 1e-12
        anti, herm = hermitian_split(x)
        # r exchanges the anti-Hermitian and Hermitian subspaces
        assert np.max(np.abs(herm_part(r_map(herm)))) < 1e-14
        assert np.max(np.abs(anti_part(r_map(anti)))) < 1e-14
        assert np.allclose(r_plus(x) - r_minus(x), x)


def test_modified_yang_baxter():
    rng = np.random.default_rng(4)
    for n in (2, 3, 4):
        for _ in range(100):
            x, y = rand_c(rng, n), rand_c(rng, n)
            resid = (comm(r_map(x), r_map(y))
                     - r_map(comm(r_map(x), y) + comm(x, r_map(y)))
                     + 0.25 * comm(x, y))
            assert np.max(np.abs(resid)) < 1e-12 * max(1.0, np.max(np.abs(x)) * np.max(np.abs(y)))


def test_subspace_commutation_relations():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a = anti_part(rand_c(rng, 3))
        b = anti_part(rand_c(rng, 3))
        h = herm_part(rand_c(rng, 3))
        k = herm_part(rand_c(rng, 3))
        assert np.max(np.abs(herm_part(comm(a, b)))) < 1e-13
        assert np.max(np.abs(herm_part(comm(h, k)))) < 1e-13
        assert np.max(np.abs(anti_part(comm(a, h)))) < 1e-13


def test_coth_map_values():
    q = np.array([1.0, 0.0])
    assert np.allclose(coth_map(q, np.diag([2.0, 3.0])), 0)
    e12 = np.zeros((2, 2), dtype=complex)
    e12[0, 1] = 1.0
    out = coth_map(q, e12)
    assert out[0, 1] == pytest.approx(1.3130352854993312, abs=1e-12)


def test_coth_map_antisymmetry_and_exchange():
    rng = np.random.default_rng(6)
    q = np.array([1.2, 0.3, -0.8])
    x, y = rand_c(rng, 3), rand_c(rng, 3)
    assert abs(pairing(coth_map(q, x), y) + pairing(x, coth_map(q, y))) < 1e-12
    h = herm_part(x)
    np.fill_diagonal(h, 0.0)
    out = coth_map(q, h)
    # Hermitian off-diagonal input maps to anti-Hermitian output
    assert np.max(np.abs(herm_part(out))) < 1e-13


def test_coth_map_regularity_error():
    q = np.array([1.0, 1.0 + 1e-9])
    with pytest.raises(IrregularPointError):
        coth_map(np.sort(q)[::-1], np.eye(2, dtype=complex))


def test_coth_series_matches_direct():
    # straddle the series cutoff: both branches agree to high accuracy
    for gap in (5e-5, 9.9e-5, 1.1e-4, 5e-4):
        q = np.array([gap, 0.0])
        e12 = np.zeros((2, 2), dtype=complex)
        e12[0, 1] = 1.0
        got = coth_map(q, e12)[0, 1].real
        want = np.cosh(gap) / np.sinh(gap)
        assert got == pytest.approx(want, rel=1e-12)
        got_inv = adq_apply(q, e12, "inv_sinh")[0, 1].real
        assert got_inv == pytest.approx(1.0 / np.sinh(gap), rel=1e-12)


def test_adq_apply():
    q = np.array([0.7, -0.2, -1.1])
    rng = np.random.default_rng(7)
    x = rand_c(rng, 3)
    assert np.allclose(adq_apply(q, np.diag(np.diag(x)), "sinh"), 0)
    assert np.allclose(adq_apply(np.zeros(3), x, "cosh"), x)
    with pytest.raises(ValueError):
        adq_apply(q, np.eye(3, dtype=complex), "inv_sinh")
    # coth * sinh = cosh entrywise on zero-diagonal matrices
    x0 = x - np.diag(np.diag(x))
    lhs = adq_apply(q, coth_map(q, x0), "sinh")
    rhs = adq_apply(q, x0, "cosh")
    np.fill_diagonal(rhs, 0.0)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_matrix_exp_basics():
    assert np.allclose(matrix_exp(np.zeros((3, 3))), np.eye(3))
    assert np.allclose(matrix_exp(np.diag([1.0, -2.0])),
                       np.diag([np.e, np.exp(-2.0)]))
    nil = np.zeros((2, 2))
    nil[0, 1] = 1.0
    assert np.allclose(matrix_exp(nil), np.eye(2) + nil, atol=1e-15)


def test_matrix_exp_inverse_and_oracle():
    rng = np.random.default_rng(8)
    for n in (2, 3, 4):
        for scale in (0.3, 2.0, 8.0):
            x = rand_c(rng, n, scale)
            e = matrix_exp(x)
            e_inv = matrix_exp(-x)
            # the inverse identity degrades with the conditioning of exp(x)
            kappa = np.max(np.abs(e)) * np.max(np.abs(e_inv))
            assert np.max(np.abs(e @ e_inv - np.eye(n))) < 1e-12 * max(1.0, kappa)
            want = scipy.linalg.expm(x)
            assert np.max(np.abs(e - want)) < 1e-11 * max(1.0, np.max(np.abs(want)))


def test_cartan_decompose_diagonal():
    g = np.diag([np.exp(2.0), np.exp(1.0)]).astype(complex)
    a, q, b = cartan_decompose(g)
    assert np.allclose(q, [2.0, 1.0])
    assert np.allclose(a, np.eye(2))
    assert np.allclose(b, np.eye(2))


def test_cartan_decompose_reconstruction():
    rng = np.random.default_rng(9)
    for n in (2, 3, 4):
        tested = 0
        while tested < 100:
            q = np.sort(rng.uniform(-1.0, 1.5, size=n))[::-1]
            if n > 1 and np.min(q[:-1] - q[1:]) < 0.05:
                continue
            g = (haar_unitary(rng, n) * np.exp(q)[None, :]) @ haar_unitary(rng, n).conj().T
            factors = cartan_decompose(g)
            assert np.max(np.abs(cartan_reconstruct(factors) - g)) < 1e-10
            assert np.allclose(factors.q, q, atol=1e-10)
            for u in (factors.a, factors.b):
                assert np.max(np.abs(u.conj().T @ u - np.eye(n))) < 1e-12
            tested += 1


def test_cartan_gauge_is_deterministic():
    rng = np.random.default_rng(10)
    g = rand_c(rng, 3) + 3.0 * np.eye(3)
    f1 = cartan_decompose(g)
    f2 = cartan_decompose(g.copy())
    assert np.array_equal(f1.a, f2.a) and np.array_equal(f1.b, f2.b)
    # gauge convention: the dominant entry of each column of a is real positive
    for j in range(3):
        k = int(np.argmax(np.abs(f1.a[:, j])))
        z = f1.a[k, j]
        assert abs(z.imag) < 1e-13 and z.real > 0


def test_cartan_errors():
    with pytest.raises(ValueError):
        cartan_decompose(np.zeros((2, 2)))
    with pytest.raises(IrregularPointError):
        cartan_decompose(np.eye(2))  # equal singular values


def test_ldu_and_udl():
    rng = np.random.default_rng(11)
    for n in (2, 3, 4):
        m = np.eye(n) + 0.3 * rand_c(rng, n)
        low, d, up = ldu(m)
        assert np.allclose(low @ np.diag(d) @ up, m, atol=1e-13)
        assert np.allclose(np.diag(low), 1.0) and np.allclose(np.diag(up), 1.0)
        assert np.max(np.abs(np.triu(low, 1))) == 0
        assert np.max(np.abs(np.tril(up, -1))) == 0
        u2, d2, l2 = udl(m)
        assert np.allclose(u2 @ np.diag(d2) @ l2, m, atol=1e-13)
        assert np.max(np.abs(np.tril(u2, -1))) == 0
        assert np.max(np.abs(np.triu(l2, 1))) == 0


def test_ldu_failure():
    m = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    with pytest.raises(FactorizationError):
        ldu(m)


def test_principal_sqrt_branch():
    d = np.array([1.0 + 0.2j, 4.0], dtype=complex)
    r = principal_sqrt_diagonal(d)
    assert np.allclose(r**2, d)
    with pytest.raises(FactorizationError):
        principal_sqrt_diagonal(np.array([-1.0 + 0j]))


def test_haar_unitary():
    rng = np.random.default_rng(12)
    u = haar_unitary(rng, 4)
    assert np.max(np.abs(u.conj().T @ u - np.eye(4))) < 1e-12
