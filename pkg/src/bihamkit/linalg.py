"""Dense linear algebra on gl(n,C) regarded as a real vector space.

Everything downstream is built from a handful of structure maps on square
complex matrices:

* the triangular decomposition X = X_> + X_0 + X_< and the induced skew
  map r(X) = (X_> - X_<)/2, together with r_pm = r +- id/2,
* the split into anti-Hermitian part X^+ = (X - X^*)/2 and Hermitian part
  X^- = (X + X^*)/2,
* the trace pairing <X, Y> = Re tr(XY),
* entrywise hyperbolic kernels driven by the gaps q_i - q_j of a real
  diagonal: coth, sinh, cosh and 1/sinh,
* the singular-value (Cartan) factorization g = A e^q B^{-1}, made
  deterministic by a fixed torus gauge,
* a Pade matrix exponential and pivot-free unit-triangular factorizations.

All functions are pure and never mutate their arguments.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

# Minimum gap |q_i - q_j| below which a point counts as irregular.
GAP_EPS = 1e-8

# Below this gap size coth and 1/sinh switch to their Laurent series.
SERIES_CUTOFF = 1e-4


class IrregularPointError(ValueError):
    """Raised when diagonal entries coincide up to the regularity gap."""


class FactorizationError(ValueError):
    """Raised when a pivot-free triangular factorization does not exist."""


def as_complex_matrix(x) -> np.ndarray:
    """Validate and return a finite square complex matrix."""
    m = np.asarray(x, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix entries must be finite")
    return m


def as_real_diagonal(q) -> np.ndarray:
    """Validate and return a finite real vector of diagonal entries."""
    v = np.asarray(q, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a real vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("diagonal entries must be finite")
    return v


def maxabs(x) -> float:
    return float(np.max(np.abs(x)))


def comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix commutator [a, b]."""
    return a @ b - b @ a


def adjoint(x: np.ndarray) -> np.ndarray:
    return x.conj().T


def triangular_split(x):
    """Split X into strictly upper, diagonal and strictly lower parts."""
    m = as_complex_matrix(x)
    return np.triu(m, 1), np.diag(np.diag(m)), np.tril(m, -1)


def hermitian_split(x):
    """Split X into anti-Hermitian part (X - X^*)/2 and Hermitian part (X + X^*)/2."""
    m = as_complex_matrix(x)
    xs = m.conj().T
    return (m - xs) / 2.0, (m + xs) / 2.0


def anti_part(x: np.ndarray) -> np.ndarray:
    return (x - x.conj().T) / 2.0


def herm_part(x: np.ndarray) -> np.ndarray:
    return (x + x.conj().T) / 2.0


def pairing(x, y) -> float:
    """Trace pairing <X, Y> = Re tr(XY)."""
    a = np.asarray(x, dtype=complex)
    b = np.asarray(y, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"size mismatch in pairing: {a.shape} vs {b.shape}")
    return float(np.einsum("ij,ji->", a, b).real)


def r_map(x) -> np.ndarray:
    """Skew map r(X) = (X_> - X_<)/2 of the triangular decomposition."""
    m = as_complex_matrix(x)
    return (np.triu(m, 1) - np.tril(m, -1)) / 2.0


def r_plus(x) -> np.ndarray:
    """r_+(X) = X_> + X_0/2."""
    m = as_complex_matrix(x)
    return r_map(m) + m / 2.0


def r_minus(x) -> np.ndarray:
    """r_-(X) = -X_< - X_0/2."""
    m = as_complex_matrix(x)
    return r_map(m) - m / 2.0


def gap_matrix(q) -> np.ndarray:
    """Antisymmetric matrix of gaps d_ij = q_i - q_j."""
    v = as_real_diagonal(q)
    return v[:, None] - v[None, :]


def check_regular(q, eps: float = GAP_EPS) -> np.ndarray:
    """Require q strictly decreasing with all adjacent gaps above eps."""
    v = as_real_diagonal(q)
    if v.size > 1 and float(np.min(v[:-1] - v[1:])) <= eps:
        raise IrregularPointError(
            "irregular point: diagonal entries must be strictly decreasing "
            f"with gaps above {eps}"
        )
    return v


def _coth(d: np.ndarray) -> np.ndarray:
    # Laurent series below the cutoff keeps the 1/sinh pole harmless; exact
    # zeros (the diagonal) get a dummy divisor and are overwritten upstream.
    small = np.abs(d) < SERIES_CUTOFF
    div = np.where(np.abs(d) > 0.0, d, 1.0)
    direct = np.cosh(div) / np.sinh(div)
    series = 1.0 / div + d / 3.0 - d**3 / 45.0
    return np.where(small, series, direct)


def _inv_sinh(d: np.ndarray) -> np.ndarray:
    small = np.abs(d) < SERIES_CUTOFF
    div = np.where(np.abs(d) > 0.0, d, 1.0)
    direct = 1.0 / np.sinh(div)
    series = 1.0 / div - d / 6.0 + 7.0 * d**3 / 360.0
    return np.where(small, series, direct)


def coth_map(q, x) -> np.ndarray:
    """Entrywise map X_ij -> coth(q_i - q_j) X_ij off the diagonal, 0 on it.

    Exchanges the off-diagonal anti-Hermitian and Hermitian subspaces and is
    antisymmetric for the trace pairing.
    """
    v = check_regular(q)
    m = as_complex_matrix(x)
    if m.shape[0] != v.size:
        raise ValueError("size mismatch between q and X")
    out = m * _coth(gap_matrix(v))
    np.fill_diagonal(out, 0.0)
    return out


def adq_apply(q, x, kind: str) -> np.ndarray:
    """Apply an entrywise function of the diagonal adjoint action to X.

    kind 'sinh' and 'cosh' scale X_ij by sinh(q_i - q_j) and cosh(q_i - q_j);
    'inv_sinh' scales by 1/sinh(q_i - q_j) and requires zero diagonal.
    """
    v = as_real_diagonal(q)
    m = as_complex_matrix(x)
    if m.shape[0] != v.size:
        raise ValueError("size mismatch between q and X")
    d = gap_matrix(v)
    if kind == "sinh":
        return m * np.sinh(d)
    if kind == "cosh":
        return m * np.cosh(d)
    if kind == "inv_sinh":
        if maxabs(np.diag(m)) > 1e-13 * (1.0 + maxabs(m)):
            raise ValueError("inv_sinh requires a zero-diagonal matrix")
        check_regular(v)
        out = m * _inv_sinh(d)
        np.fill_diagonal(out, 0.0)
        return out
    raise ValueError(f"unknown kind {kind!r}")


# Pade [6/6] numerator coefficients of exp at the origin.
_PADE6 = (1.0, 1.0 / 2.0, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0,
          1.0 / 15840.0, 1.0 / 665280.0)

# Squaring kicks in above this 1-norm.
_EXP_THRESHOLD = 0.5


def matrix_exp(x) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a diagonal Pade kernel."""
    m = as_complex_matrix(x)
    n = m.shape[0]
    norm = float(np.linalg.norm(m, 1))
    squarings = 0
    if norm > _EXP_THRESHOLD:
        squarings = int(np.ceil(np.log2(norm / _EXP_THRESHOLD)))
        m = m / (2.0**squarings)
    powers = [np.eye(n, dtype=complex)]
    for _ in range(6):
        powers.append(powers[-1] @ m)
    num = sum(c * p for c, p in zip(_PADE6, powers))
    den = sum(c * (-1.0) ** k * p for k, (c, p) in enumerate(zip(_PADE6, powers)))
    out = np.linalg.solve(den, num)
    for _ in range(squarings):
        out = out @ out
    return out


class CartanFactors(NamedTuple):
    """Factors of g = a e^q b^{-1} with a, b unitary and q strictly decreasing."""

    a: np.ndarray
    q: np.ndarray
    b: np.ndarray


def cartan_decompose(g, gap_eps: float = GAP_EPS) -> CartanFactors:
    """Singular-value factorization g = a e^q b^{-1} with a fixed torus gauge.

    The residual torus freedom (a, b) -> (a t, b t) is fixed by scaling each
    column pair so that the column entry of a with the largest modulus
    (lowest row index on ties) becomes real positive.  Inputs with singular
    values closer than gap_eps raise IrregularPointError.
    """
    m = as_complex_matrix(g)
    u, s, vh = np.linalg.svd(m)
    if s[-1] <= 1e-13 * max(1.0, float(s[0])):
        raise ValueError("singular g: cannot factorize")
    q = np.log(s)
    check_regular(q, gap_eps)
    a = u.copy()
    b = vh.conj().T.copy()
    for j in range(m.shape[0]):
        k = int(np.argmax(np.abs(a[:, j])))
        z = a[k, j]
        tau = z.conjugate() / abs(z)
        a[:, j] *= tau
        b[:, j] *= tau
    return CartanFactors(a, q, b)


def cartan_reconstruct(factors: CartanFactors) -> np.ndarray:
    a, q, b = factors
    return (a * np.exp(q)[None, :]) @ b.conj().T


def ldu(m, min_pivot: float = 1e-12):
    """Pivot-free factorization M = L diag(d) U, L unit lower, U unit upper.

    Raises FactorizationError when a leading principal minor vanishes (up to
    min_pivot relative to the matrix scale).
    """
    a = as_complex_matrix(m).copy()
    n = a.shape[0]
    floor = min_pivot * max(1.0, maxabs(a))
    lower = np.eye(n, dtype=complex)
    for k in range(n):
        piv = a[k, k]
        if abs(piv) <= floor:
            raise FactorizationError("vanishing leading minor: no LDU factorization")
        for i in range(k + 1, n):
            f = a[i, k] / piv
            lower[i, k] = f
            a[i, k + 1:] -= f * a[k, k + 1:]
            a[i, k] = 0.0
    d = np.diag(a).copy()
    upper = np.triu(a) / d[:, None]
    return lower, d, upper


def udl(m, min_pivot: float = 1e-12):
    """Pivot-free factorization M = U diag(d) L, U unit upper, L unit lower."""
    a = as_complex_matrix(m)
    flip = a[::-1, ::-1]
    l2, d2, u2 = ldu(flip, min_pivot)
    return l2[::-1, ::-1], d2[::-1], u2[::-1, ::-1]


def principal_sqrt_diagonal(d, wedge: float = 1e-9) -> np.ndarray:
    """Principal square roots of diagonal entries, rejecting the branch cut."""
    v = np.asarray(d, dtype=complex)
    for z in v:
        if z == 0 or (z.real < 0.0 and abs(z.imag) <= wedge * abs(z)):
            raise FactorizationError(
                "diagonal entry on or near the negative real axis: "
                "no principal square root"
            )
    return np.sqrt(v)


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    qmat, r = np.linalg.qr(z)
    ph = np.diag(r).copy()
    ph /= np.abs(ph)
    return qmat * ph[None, :]
