"""Real observables on the phase space of pairs (g, J).

A phase point couples an invertible g in GL(n,C) with an arbitrary J in
gl(n,C).  Observables are smooth real functions F(g, J) carrying five
derivative matrices against the trace pairing <X, Y> = Re tr(XY):

    <nabla1 F, X>  = d/dt F(e^{tX} g, J),
    <nabla1' F, X> = d/dt F(g e^{tX}, J),
    <d2 F, X>      = d/dt F(g, J + tX),
    nabla2 F  = J d2F,      nabla2' F = d2F J.

Built-in families (trace polynomials in g, g^{-1}, g^*, J, J^* and constant
matrices) carry exact gradients assembled from cyclic complements; anything
else falls back to central finite differences over the real basis
{E_ab, i E_ab} with the duality rule W_ba = l(E_ab) - i l(i E_ab).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .linalg import as_complex_matrix, maxabs

FD_STEP = 1e-5


class PhasePoint(NamedTuple):
    """Point (g, J) with g an invertible group element and J a Lie-algebra value."""

    g: np.ndarray
    J: np.ndarray


def phase_point(g, j) -> PhasePoint:
    """Validate and build a phase point; g must be safely invertible."""
    gm = as_complex_matrix(g)
    jm = as_complex_matrix(j)
    if gm.shape != jm.shape:
        raise ValueError("g and J must have the same size")
    s = np.linalg.svd(gm, compute_uv=False)
    if s[-1] <= 1e-13 * max(1.0, float(s[0])):
        raise ValueError("singular g in phase point")
    return PhasePoint(gm, jm)


@dataclass(frozen=True)
class GradientBundle:
    """The five derivative matrices of an observable at one point."""

    nabla1: np.ndarray
    nabla1_prime: np.ndarray
    d2: np.ndarray
    nabla2: np.ndarray
    nabla2_prime: np.ndarray

    @classmethod
    def first_order(cls, nabla1, nabla1_prime, d2, j):
        return cls(nabla1, nabla1_prime, d2, j @ d2, d2 @ j)


def _dual_from_table(re_part: np.ndarray, im_part: np.ndarray) -> np.ndarray:
    # W_ba = l(E_ab) - i l(i E_ab), with l tabulated per (a, b).
    return re_part.T - 1j * im_part.T


def _elementary_exp(n: int, a: int, b: int, tau: complex) -> np.ndarray:
    # exp(tau E_ab): closed form, exact for the nilpotent off-diagonal case.
    out = np.eye(n, dtype=complex)
    if a == b:
        out[a, a] = np.exp(tau)
    else:
        out[a, b] = tau
    return out


def finite_difference_bundles(values_fn, x: PhasePoint, m: int,
                              step: float = FD_STEP):
    """Central-difference gradient bundles of an m-vector of scalar functions
    sharing the probe points; values_fn(point) returns a length-m sequence."""
    g, j = x
    n = g.shape[0]
    hg = step * (1.0 + maxabs(g))
    hj = step * (1.0 + maxabs(j))

    def rates(hi_pt, lo_pt, h):
        hi = np.asarray(values_fn(hi_pt), dtype=float)
        lo = np.asarray(values_fn(lo_pt), dtype=float)
        return (hi - lo) / (2.0 * h)

    tables = np.empty((6, m, n, n))
    for a in range(n):
        for b in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[a, b] = 1.0
            tables[0, :, a, b] = rates(PhasePoint(g, j + hj * e),
                                       PhasePoint(g, j - hj * e), hj)
            tables[1, :, a, b] = rates(PhasePoint(g, j + 1j * hj * e),
                                       PhasePoint(g, j - 1j * hj * e), hj)
            for idx, tau in ((2, 1.0), (3, 1.0j)):
                plus = _elementary_exp(n, a, b, tau * hg)
                minus = _elementary_exp(n, a, b, -tau * hg)
                tables[idx, :, a, b] = rates(PhasePoint(plus @ g, j),
                                             PhasePoint(minus @ g, j), hg)
                tables[idx + 2, :, a, b] = rates(PhasePoint(g @ plus, j),
                                                 PhasePoint(g @ minus, j), hg)
    if not np.all(np.isfinite(tables)):
        raise ValueError("non-finite value while probing an observable")
    out = []
    for i in range(m):
        out.append(GradientBundle.first_order(
            _dual_from_table(tables[2, i], tables[3, i]),
            _dual_from_table(tables[4, i], tables[5, i]),
            _dual_from_table(tables[0, i], tables[1, i]),
            j,
        ))
    return out


def finite_difference_bundle(value_fn, x: PhasePoint, step: float = FD_STEP) -> GradientBundle:
    """Central-difference gradient bundle of a scalar function of (g, J)."""
    return finite_difference_bundles(lambda y: (value_fn(y),), x, 1, step)[0]


# Invariance tags: subsets of {"L", "R"} for left/right unitary invariance.
BOTH = frozenset({"L", "R"})
LEFT = frozenset({"L"})
RIGHT = frozenset({"R"})
NONE = frozenset()


class Observable:
    """Base class: a real function of (g, J) with a gradient bundle."""

    invariance: frozenset = NONE
    step: float = FD_STEP

    def value(self, x: PhasePoint) -> float:
        raise NotImplementedError

    def bundle(self, x: PhasePoint) -> GradientBundle:
        return finite_difference_bundle(self.value, x, self.step)

    @property
    def gradient_mode(self) -> str:
        return "finite-difference"

    def shift_derivative(self) -> "Observable":
        """Derivative along the flow (g, J) -> (g, J + t I)."""
        return _ShiftDerived(self)

    # Small operator algebra; combinations stay exact when the parts are.
    def __add__(self, other):
        if isinstance(other, Observable):
            return _Sum((self, other))
        return _Affine(self, 1.0, float(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rsub__(self, other):
        return (-1.0) * self + other

    def __mul__(self, other):
        if isinstance(other, Observable):
            return _Product(self, other)
        return _Affine(self, float(other), 0.0)

    __rmul__ = __mul__

    def __neg__(self):
        return _Affine(self, -1.0, 0.0)


class _Sum(Observable):
    def __init__(self, parts: Sequence[Observable]):
        self.parts = tuple(parts)
        self.invariance = frozenset.intersection(*(p.invariance for p in self.parts))

    def value(self, x):
        return sum(p.value(x) for p in self.parts)

    @property
    def gradient_mode(self):
        modes = {p.gradient_mode for p in self.parts}
        return "analytic" if modes == {"analytic"} else "finite-difference"

    def bundle(self, x):
        bs = [p.bundle(x) for p in self.parts]
        return GradientBundle(*(sum(getattr(b, f) for b in bs)
                                for f in GradientBundle.__dataclass_fields__))

    def shift_derivative(self):
        return _Sum([p.shift_derivative() for p in self.parts])


class _Affine(Observable):
    def __init__(self, base: Observable, scale: float, offset: float):
        self.base = base
        self.scale = scale
        self.offset = offset
        self.invariance = base.invariance

    def value(self, x):
        return self.scale * self.base.value(x) + self.offset

    @property
    def gradient_mode(self):
        return self.base.gradient_mode

    def bundle(self, x):
        b = self.base.bundle(x)
        return GradientBundle(*(self.scale * getattr(b, f)
                                for f in GradientBundle.__dataclass_fields__))

    def shift_derivative(self):
        return _Affine(self.base.shift_derivative(), self.scale, 0.0)


class _Product(Observable):
    def __init__(self, left: Observable, right: Observable):
        self.left = left
        self.right = right
        self.invariance = left.invariance & right.invariance

    def value(self, x):
        return self.left.value(x) * self.right.value(x)

    @property
    def gradient_mode(self):
        modes = {self.left.gradient_mode, self.right.gradient_mode}
        return "analytic" if modes == {"analytic"} else "finite-difference"

    def bundle(self, x):
        lv = self.left.value(x)
        rv = self.right.value(x)
        lb = self.left.bundle(x)
        rb = self.right.bundle(x)
        return GradientBundle(*(lv * getattr(rb, f) + rv * getattr(lb, f)
                                for f in GradientBundle.__dataclass_fields__))

    def shift_derivative(self):
        return _Product(self.left.shift_derivative(), self.right) + \
            _Product(self.left, self.right.shift_derivative())


class FuncObservable(Observable):
    """Observable wrapping an arbitrary callable; finite-difference gradients."""

    def __init__(self, fn: Callable[[PhasePoint], float], invariance=NONE,
                 step: float = FD_STEP):
        self.fn = fn
        self.invariance = frozenset(invariance)
        self.step = step

    def value(self, x):
        return float(self.fn(x))


class _ShiftDerived(Observable):
    # D[F](g, J) = <d2 F, I>; generic fallback used by non-word observables.
    def __init__(self, base: Observable):
        self.base = base
        self.invariance = base.invariance

    def value(self, x):
        return float(np.trace(self.base.bundle(x).d2).real)


# ---------------------------------------------------------------------------
# Trace-word observables with exact gradients.
#
# A word is a tuple of letters; each letter is one of the strings
# 'g', 'ginv', 'gstar', 'gstarinv', 'j', 'jstar', or a constant matrix.
# The observable value is const + sum over terms of Re(c * tr(product)).
# ---------------------------------------------------------------------------

def _letter_value(letter, g, j, ginv):
    if isinstance(letter, str):
        if letter == "g":
            return g
        if letter == "j":
            return j
        if letter == "ginv":
            return ginv
        if letter == "gstar":
            return g.conj().T
        if letter == "gstarinv":
            return ginv.conj().T
        if letter == "jstar":
            return j.conj().T
        raise ValueError(f"unknown letter {letter!r}")
    return letter


class TraceWords(Observable):
    """Re of a complex-linear combination of trace monomials, plus a constant.

    Gradients are exact: for each letter occurrence the cyclic complement C
    of the word contributes per the letter type, e.g. the letter g adds gC to
    nabla1 and Cg to nabla1', the letter j adds C to d2.
    """

    def __init__(self, terms, const: float = 0.0, invariance=NONE):
        cleaned = []
        for c, word in terms:
            cleaned.append((complex(c), tuple(
                w if isinstance(w, str) else as_complex_matrix(w) for w in word)))
        self.terms = cleaned
        self.const = float(const)
        self.invariance = frozenset(invariance)
        self._uses_g = any(isinstance(w, str) and w.startswith("g")
                           for _, word in cleaned for w in word)

    @property
    def gradient_mode(self):
        return "analytic"

    def value(self, x):
        g, j = x
        ginv = np.linalg.inv(g) if self._uses_g else None
        total = self.const
        for c, word in self.terms:
            prod = np.eye(g.shape[0], dtype=complex)
            for letter in word:
                prod = prod @ _letter_value(letter, g, j, ginv)
            total += (c * np.trace(prod)).real
        return float(total)

    def bundle(self, x):
        g, j = x
        n = g.shape[0]
        ginv = np.linalg.inv(g) if self._uses_g else None
        n1 = np.zeros((n, n), dtype=complex)
        n1p = np.zeros((n, n), dtype=complex)
        d2 = np.zeros((n, n), dtype=complex)
        eye = np.eye(n, dtype=complex)
        for c, word in self.terms:
            mats = [_letter_value(w, g, j, ginv) for w in word]
            m = len(mats)
            pre = [eye]
            for k in range(m - 1):
                pre.append(pre[-1] @ mats[k])
            suf = [eye] * m
            for k in range(m - 2, -1, -1):
                suf[k] = mats[k + 1] @ suf[k + 1]
            for k, letter in enumerate(word):
                if not isinstance(letter, str):
                    continue
                cyc = suf[k] @ (c * pre[k])
                if letter == "j":
                    d2 += cyc
                elif letter == "jstar":
                    d2 += cyc.conj().T
                elif letter == "g":
                    n1 += g @ cyc
                    n1p += cyc @ g
                elif letter == "gstar":
                    n1 += g @ cyc.conj().T
                    n1p += cyc.conj().T @ g
                elif letter == "ginv":
                    n1 -= cyc @ ginv
                    n1p -= ginv @ cyc
                elif letter == "gstarinv":
                    n1 -= cyc.conj().T @ ginv
                    n1p -= ginv @ cyc.conj().T
        return GradientBundle.first_order(n1, n1p, d2, j)

    def shift_derivative(self):
        # Summing over j/jstar letters with that letter removed is the exact
        # derivative along (g, J) -> (g, J + t I); a word reduced to the
        # empty product contributes Re(c) * tr(I) = Re(c) * n.
        terms = []
        empty = 0.0 + 0.0j
        for c, word in self.terms:
            for k, letter in enumerate(word):
                if isinstance(letter, str) and letter in ("j", "jstar"):
                    rest = word[:k] + word[k + 1:]
                    if rest:
                        terms.append((c, rest))
                    else:
                        empty += c
        return _WordsPlusTraceOfIdentity(terms, empty, self.invariance)


class _WordsPlusTraceOfIdentity(Observable):
    # Trace words plus a c * tr(I) term whose value depends only on n.
    def __init__(self, terms, empty_coeff, invariance):
        self.words = TraceWords(terms, 0.0, invariance)
        self.empty_coeff = complex(empty_coeff)
        self.invariance = frozenset(invariance)

    @property
    def gradient_mode(self):
        return "analytic"

    def value(self, x):
        return self.words.value(x) + (self.empty_coeff * x.g.shape[0]).real

    def bundle(self, x):
        return self.words.bundle(x)

    def shift_derivative(self):
        return self.words.shift_derivative()


def basis_matrix(k: int, n: int) -> np.ndarray:
    """Element k of the fixed real basis of gl(n,C): all E_ab then all iE_ab,
    row-major."""
    if not 0 <= k < 2 * n * n:
        raise ValueError(f"basis index {k} out of range for n={n}")
    unit = 1.0 if k < n * n else 1.0j
    flat = k % (n * n)
    t = np.zeros((n, n), dtype=complex)
    t[flat // n, flat % n] = unit
    return t


def hamiltonian(k: int, kind: str = "real") -> Observable:
    """Spectral Hamiltonian (1/k) Re tr(J^k) or (1/k) Im tr(J^k)."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if kind == "real":
        coeff = 1.0 / k
    elif kind == "imag":
        coeff = -1.0j / k
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return TraceWords([(coeff, ("j",) * k)], invariance=BOTH)


def momentum_component(t) -> Observable:
    """Component <T, J> = Re tr(T J) for a constant matrix T."""
    return TraceWords([(1.0, (as_complex_matrix(t), "j"))])


def g_entry(a: int, b: int, part: str, n: int) -> Observable:
    """Coordinate observable Re g_ab or Im g_ab (0-based indices)."""
    e = np.zeros((n, n), dtype=complex)
    e[b, a] = 1.0
    coeff = 1.0 if part == "re" else -1.0j
    if part not in ("re", "im"):
        raise ValueError(f"unknown part {part!r}")
    return TraceWords([(coeff, ("g", e))])


def conjugate_momentum(x: PhasePoint) -> np.ndarray:
    """The matrix -g^{-1} J g, constant along every spectral flow."""
    g, j = x
    return -np.linalg.solve(g, j @ g)


def _split_letters(tilde: bool):
    # (J)^+ and (J)^- expand into half-sums of primitive words; for the
    # conjugated variable -g^{-1} J g the adjoint expands through g^*.
    if not tilde:
        base = [(1.0 + 0j, ("j",))]
        star = [(1.0 + 0j, ("jstar",))]
    else:
        base = [(-1.0 + 0j, ("ginv", "j", "g"))]
        star = [(-1.0 + 0j, ("gstar", "jstar", "gstarinv"))]
    plus = [(c / 2.0, w) for c, w in base] + [(-c / 2.0, w) for c, w in star]
    minus = [(c / 2.0, w) for c, w in base] + [(c / 2.0, w) for c, w in star]
    return plus, minus


def _word_concat(lhs, rhs):
    return [(c1 * c2, w1 + w2) for c1, w1 in lhs for c2, w2 in rhs]


def trace_word(factors, kind: str = "real", tilde: bool = False) -> Observable:
    """Trace word in the split parts of J (or of -g^{-1} J g when tilde).

    factors is a sequence of (sign, power) with sign '+' or '-' selecting the
    anti-Hermitian or Hermitian part; the observable is Re or Im of the trace
    of the resulting product.  Such words are invariant under both unitary
    actions.
    """
    factors = list(factors)
    if not factors or any(p < 1 for _, p in factors):
        raise ValueError("factors must be a nonempty list of (sign, power>=1)")
    plus, minus = _split_letters(tilde)
    terms = [(1.0 + 0j, ())]
    for sign, power in factors:
        part = plus if sign == "+" else minus
        for _ in range(power):
            terms = _word_concat(terms, part)
    if kind == "imag":
        terms = [(-1j * c, w) for c, w in terms]
    elif kind != "real":
        raise ValueError(f"unknown kind {kind!r}")
    return TraceWords(terms, invariance=BOTH)


def coordinate_observables(n: int):
    """All 4n^2 real coordinate functions: g entries then J components."""
    coords = []
    for a in range(n):
        for b in range(n):
            coords.append(g_entry(a, b, "re", n))
            coords.append(g_entry(a, b, "im", n))
    for k in range(2 * n * n):
        coords.append(momentum_component(basis_matrix(k, n)))
    return coords


def fd_check_bundle(obs: Observable, x: PhasePoint, step: float = FD_STEP) -> float:
    """Max deviation between an observable's bundle and central differences."""
    ana = obs.bundle(x)
    num = finite_difference_bundle(obs.value, x, step)
    worst = 0.0
    for f in ("nabla1", "nabla1_prime", "d2"):
        a = getattr(ana, f)
        b = getattr(num, f)
        worst = max(worst, maxabs(a - b) / (1.0 + maxabs(a)))
    return worst


def verify_invariance(obs: Observable, x: PhasePoint, rng: np.random.Generator,
                      trials: int = 8, tol: float = 1e-9) -> bool:
    """Spot-check the declared unitary invariance by random group probes."""
    from .linalg import haar_unitary

    base = obs.value(x)
    g, j = x
    for _ in range(trials):
        eta = haar_unitary(rng, g.shape[0])
        if "R" in obs.invariance:
            moved = obs.value(PhasePoint(g @ eta.conj().T, j))
            if abs(moved - base) > tol * (1.0 + abs(base)):
                return False
        if "L" in obs.invariance:
            moved = obs.value(PhasePoint(eta @ g, eta @ j @ eta.conj().T))
            if abs(moved - base) > tol * (1.0 + abs(base)):
                return False
    return True


def parse_observable(spec: str, n: int) -> Observable:
    """Build an observable from a registry string.

    Formats: 'H:k', 'Htilde:k', 'Jk:a,b,re|im' (1-based basis element E_ab or
    iE_ab), 'gr:a,b' / 'gi:a,b' (1-based entries), 'word:+1-2[,im]' and
    'tword:...' for words in the split parts of J or of -g^{-1} J g.
    """
    head, _, tail = spec.partition(":")
    head = head.strip()
    tail = tail.strip()
    if head in ("H", "Htilde"):
        return hamiltonian(int(tail), "real" if head == "H" else "imag")
    if head == "Jk":
        a_s, b_s, part = (s.strip() for s in tail.split(","))
        a, b = int(a_s) - 1, int(b_s) - 1
        if not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"index out of range in {spec!r}")
        t = np.zeros((n, n), dtype=complex)
        t[a, b] = 1.0 if part == "re" else 1.0j
        return momentum_component(t)
    if head in ("gr", "gi"):
        a_s, b_s = (s.strip() for s in tail.split(","))
        a, b = int(a_s) - 1, int(b_s) - 1
        if not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"index out of range in {spec!r}")
        return g_entry(a, b, "re" if head == "gr" else "im", n)
    if head in ("word", "tword"):
        body, _, kind = tail.partition(",")
        kind = kind.strip() or "real"
        if kind == "re":
            kind = "real"
        if kind == "im":
            kind = "imag"
        factors = []
        i = 0
        while i < len(body):
            sign = body[i]
            if sign not in "+-":
                raise ValueError(f"bad word spec {spec!r}")
            i += 1
            start = i
            while i < len(body) and body[i].isdigit():
                i += 1
            if start == i:
                raise ValueError(f"bad word spec {spec!r}")
            factors.append((sign, int(body[start:i])))
        return trace_word(factors, kind, tilde=(head == "tword"))
    raise ValueError(f"unknown observable spec {spec!r}")
