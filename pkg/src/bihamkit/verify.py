"""Randomized verification suites and machine-readable reports.

Each suite turns one structural statement about the brackets, flows,
reduction, spin parametrization or the double into a max residual over
seeded random trials.  Suites are deterministic: the generator of suite i
is seeded with (seed, i), so a fixed configuration reproduces a report bit
for bit regardless of which subset of suites is selected.

Two tolerance classes apply: closed-form identities (algebra only, default
1e-8 unless the suite pins a tighter one) and finite-difference limited
identities (default scales like 1e-5).  Residuals of relative suites are
already normalized by max(1, magnitudes involved).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import sampling
from .brackets import (
    CANONICAL,
    QUADRATIC,
    BracketSelector,
    jacobi_terms,
    lie_derivative_bracket,
    pb1,
    pb2,
)
from .double import transport_residuals
from .flows import conservation_report, explicit_flow
from .linalg import anti_part, comm, coth_map, herm_part, maxabs, pairing, adq_apply
from .observables import PhasePoint, finite_difference_bundle, hamiltonian
from .reduction import (
    SpectralReduced,
    embed,
    extend_invariant,
    hermitian_flow_field,
    lifted_gradient,
    minus_pb1,
    minus_pb2,
    red_pb1,
    red_pb2,
    reduced_vector_field,
    restrict_minus,
)
from .sampling import (
    coordinate_spin_function,
    random_coordinate_observable,
    random_invariant_reduced_observable,
    random_near_identity_double,
    random_phase_point,
    random_reduced_point,
    random_slice_observable,
    random_spin_function,
    spin_pullback,
)
from .spin import SpinFunction, from_spin, spin_pb1


@dataclass(frozen=True)
class VerificationConfig:
    n: int = 3
    trials: int = 20
    seed: int = 0
    tol_abs: float | None = None
    tol_rel: float | None = None
    fd_step: float = 1e-5
    suites: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.fd_step <= 0:
            raise ValueError("fd_step must be positive")


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    trials: int
    max_residual: float
    threshold: float
    passed: bool

    def as_json(self) -> dict:
        return {
            "suite": self.suite,
            "trials": self.trials,
            "max_residual": self.max_residual,
            "threshold": self.threshold,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class VerificationReport:
    config: VerificationConfig
    results: tuple[SuiteResult, ...]
    passed: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "passed", all(r.passed for r in self.results))

    def as_json(self) -> dict:
        cfg = {
            "n": self.config.n,
            "trials": self.config.trials,
            "seed": self.config.seed,
            "tol_abs": self.config.tol_abs,
            "tol_rel": self.config.tol_rel,
            "fd_step": self.config.fd_step,
            "suites": list(self.config.suites) if self.config.suites else None,
        }
        return {
            "config": cfg,
            "suites": [r.as_json() for r in self.results],
            "pass": self.passed,
        }

    def to_json_text(self) -> str:
        return json.dumps(self.as_json(), indent=2, sort_keys=True)

    def to_csv_text(self) -> str:
        lines = ["suite,trials,max_residual,threshold,pass"]
        for r in self.results:
            lines.append(f"{r.suite},{r.trials},{r.max_residual!r},"
                         f"{r.threshold!r},{str(r.passed).lower()}")
        return "\n".join(lines) + "\n"


def _sizes(cfg: VerificationConfig):
    return sorted({2, cfg.n}) if cfg.n != 2 else [2]


def _rel(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


# --- suite runners: each returns (trials_run, max_residual) ----------------


def _suite_jacobi(cfg, rng, sel_source):
    worst = 0.0
    count = 0
    for n in _sizes(cfg):
        for _ in range(cfg.trials):
            sel = sel_source(rng)
            x = random_phase_point(rng, n)
            triple = [random_coordinate_observable(rng, n) for _ in range(3)]
            terms = jacobi_terms(sel, *triple, x)
            scale = max(1.0, *(abs(t) for t in terms))
            worst = max(worst, abs(sum(terms)) / scale)
            count += 1
    return count, worst


def suite_jacobi_canonical(cfg, rng):
    return _suite_jacobi(cfg, rng, lambda r: CANONICAL)


def suite_jacobi_quadratic(cfg, rng):
    return _suite_jacobi(cfg, rng, lambda r: QUADRATIC)


def suite_compatibility(cfg, rng):
    def pick(r):
        a, b = r.uniform(-2.0, 2.0, size=2)
        if abs(a) + abs(b) < 0.1:
            a = 1.0
        return BracketSelector(float(a), float(b))

    return _suite_jacobi(cfg, rng, pick)


def suite_lie_derivative(cfg, rng):
    worst = 0.0
    count = 0
    for n in _sizes(cfg):
        for _ in range(cfg.trials):
            x = random_phase_point(rng, n)
            f = random_coordinate_observable(rng, n)
            h = random_coordinate_observable(rng, n)
            worst = max(worst, _rel(pb1(f, h, x),
                                     lie_derivative_bracket(f, h, x,
                                                            step=cfg.fd_step)))
            count += 1
    return count, worst


def suite_recursion(cfg, rng):
    worst = 0.0
    count = 0
    for n in _sizes(cfg):
        for _ in range(cfg.trials):
            x = random_phase_point(rng, n)
            f = random_coordinate_observable(rng, n)
            for kind in ("real", "imag"):
                for k in range(1, n + 1):
                    lhs = pb2(f, hamiltonian(k, kind), x)
                    rhs = pb1(f, hamiltonian(k + 1, kind), x)
                    worst = max(worst, _rel(lhs, rhs))
            count += 1
    return count, worst


def flow_test_point(rng, n: int, k: int, horizon: float = 10.0,
                    budget: float = 1.5) -> PhasePoint:
    """Random point with |J^k| * horizon held near the budget, so that
    exp(J^k t) stays well conditioned over the whole time window."""
    x = random_phase_point(rng, n)
    power_norm = float(np.linalg.norm(np.linalg.matrix_power(x.J, k), 1))
    factor = (budget / (horizon * power_norm)) ** (1.0 / k)
    return PhasePoint(x.g, factor * x.J)


def suite_flows_conservation(cfg, rng):
    worst = 0.0
    count = 0
    for n in _sizes(cfg):
        for _ in range(cfg.trials):
            k = int(rng.integers(1, 3))
            x0 = flow_test_point(rng, n, k)
            kind = "real" if rng.integers(0, 2) == 0 else "imag"
            traj = [explicit_flow(x0, k, kind, t)
                    for t in np.linspace(0.0, 10.0, 11)]
            drift = conservation_report(traj)
            worst = max(worst, max(drift.values()))
            count += 1
    return count, worst


def suite_reduction_oracle(cfg, rng):
    worst = 0.0
    count = 0
    for n in _sizes(cfg):
        for _ in range(cfg.trials):
            y = random_reduced_point(rng, n)
            f = random_invariant_reduced_observable(rng, n, step=cfg.fd_step)
            h = random_invariant_reduced_observable(rng, n, step=cfg.fd_step)
            x = embed(y)
            ef, eh = extend_invariant(f), extend_invariant(h)
            worst = max(worst, _rel(red_pb1(f, h, y), pb1(ef, eh, x)))
            worst = max(worst, _rel(red_pb2(f, h, y), pb2(ef, eh, x)))
            count += 1
    return count, worst


def suite_gradient_reconstruction(cfg, rng):
    worst = 0.0
    count = 0
    for n in _sizes(cfg):
        for _ in range(cfg.trials):
            y = random_reduced_point(rng, n)
            f = random_invariant_reduced_observable(rng, n, step=cfg.fd_step)
            built = lifted_gradient(f, y)
            probed = finite_difference_bundle(
                extend_invariant(f).value, embed(y), step=cfg.fd_step).nabla1
            worst = max(worst, maxabs(built - probed) / (1.0 + maxabs(built)))
            count += 1
    return count, worst


def suite_hermitian_slice(cfg, rng):
    """Composite: bracket agreement at 1e-8, closed-form fields at 1e-12;
    reported as a ratio against those part tolerances."""
    tol_bracket = 1e-8
    tol_exact = 1e-12
    worst = 0.0
    count = 0
    for n in _sizes(cfg):
        for _ in range(cfg.trials):
            y = restrict_minus(random_reduced_point(rng, n, shape="hermitian"))
            f = random_slice_observable(rng, n, step=cfg.fd_step)
            h = random_slice_observable(rng, n, step=cfg.fd_step)
            fr, hr = f.as_reduced(), h.as_reduced()
            r1 = _rel(minus_pb1(f, h, y), red_pb1(fr, hr, y))
            r2 = _rel(minus_pb2(f, h, y), red_pb2(fr, hr, y))
            worst = max(worst, r1 / tol_bracket, r2 / tol_bracket)
            for k in range(1, n + 1):
                tilde = reduced_vector_field(SpectralReduced(k, "imag"),
                                             "quadratic", y)
                vanish = max(maxabs(tilde.dq), maxabs(tilde.dJ))
                gen = reduced_vector_field(SpectralReduced(k, "real"),
                                           "quadratic", y)
                closed = hermitian_flow_field(k, "quadratic", y)
                match = max(maxabs(gen.dq - closed.dq), maxabs(gen.dJ - closed.dJ))
                worst = max(worst, vanish / tol_exact, match / tol_exact)
            count += 1
    return count, worst


def suite_spin_change_of_variables(cfg, rng):
    """Composite: change of variables at 1e-6, canonical pairs and the
    decoupling at 1e-9; reported as a ratio against those part tolerances."""
    tol_cov = 1e-6
    tol_canon = 1e-9
    worst = 0.0
    count = 0
    for n in _sizes(cfg):
        for _ in range(cfg.trials):
            s = sampling.random_spin_coordinates(rng, n)
            y = from_spin(s)
            f = random_spin_function(rng, n, step=cfg.fd_step)
            h = random_spin_function(rng, n, step=cfg.fd_step)
            cov = _rel(spin_pb1(f, h, s), red_pb1(spin_pullback(f),
                                                  spin_pullback(h), y))
            worst = max(worst, cov / tol_cov)
            i = int(rng.integers(0, n))
            j = int(rng.integers(0, n))
            qi = coordinate_spin_function("q", i)
            pj = coordinate_spin_function("p", j)
            canon = abs(spin_pb1(qi, pj, s) - (1.0 if i == j else 0.0))
            worst = max(worst, canon / tol_canon)
            qp_only = SpinFunction(
                lambda ss: float(np.sum(ss.q * ss.p)), invariant=True)
            spin_only = SpinFunction(
                lambda ss: float(np.trace(ss.xi_l @ ss.xi_r).real),
                invariant=True)
            worst = max(worst, abs(spin_pb1(qp_only, spin_only, s)) / tol_canon)
            count += 1
    return count, worst


def _random_split_matrices(rng, n):
    m = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n)
    return m


def suite_quartic_identity(cfg, rng):
    """The quartic exchange identity for the second reduced bracket: the
    cross terms of J d2f and d2h J collapse to two split-conjugation
    pairings."""
    worst = 0.0
    count = 0
    for n in _sizes(cfg):
        for _ in range(cfg.trials):
            j = _random_split_matrices(rng, n)
            d2f = _random_split_matrices(rng, n)
            d2h = _random_split_matrices(rng, n)
            fp, fm = anti_part(d2f), herm_part(d2f)
            hp, hm = anti_part(d2h), herm_part(d2h)
            jp, jm = anti_part(j), herm_part(j)

            def cross(a, b):
                n2a, n2pa = j @ a, a @ j
                n2b, n2pb = j @ b, b @ j
                return (pairing(herm_part(n2a), herm_part(n2pb))
                        + pairing(anti_part(n2pa), anti_part(n2b)))

            lhs = cross(d2f, d2h) - cross(d2h, d2f)
            rhs = (4.0 * pairing(fp, anti_part(jp @ hp @ jm))
                   + 4.0 * pairing(fm, herm_part(jm @ hm @ jp)))
            worst = max(worst, _rel(lhs, rhs))
            count += 1
    return count, worst


def suite_spin_bracket_identities(cfg, rng):
    """Exchange identities used by the spin form of the first reduced
    bracket, on random derivative data in the constrained subspaces."""
    worst = 0.0
    count = 0
    for n in _sizes(cfg):
        if n < 2:
            continue
        for _ in range(cfg.trials):
            q = sampling.random_decreasing_gaps(rng, n)
            data = {}
            for name in ("fp", "hp"):
                d = np.diag(rng.standard_normal(n)).astype(complex)
                data[name] = d
            for name in ("frp", "hrp", "xlp", "xrp"):
                m = _random_split_matrices(rng, n)
                a = anti_part(m)
                np.fill_diagonal(a, 0.0)
                data[name] = a
            fq = np.diag(rng.standard_normal(n)).astype(complex)

            def s_(x):
                return adq_apply(q, x, "sinh")

            def c_(x):
                return adq_apply(q, x, "cosh")

            def sinv(x):
                return adq_apply(q, x, "inv_sinh")

            p_diag = np.diag(rng.standard_normal(n)).astype(complex)
            jm = p_diag - coth_map(q, data["xlp"]) - sinv(data["xrp"])
            d2f_m = data["fp"] + s_(data["frp"])
            d2h_m = data["hp"] + s_(data["hrp"])

            # First exchange identity: Hermitian-Hermitian block of the
            # coth-coupled term against its spin-variable form.
            lhs = (pairing(coth_map(q, comm(d2f_m, jm)), d2h_m)
                   - pairing(coth_map(q, comm(d2h_m, jm)), d2f_m))
            rhs = (pairing(data["xrp"], comm(data["frp"], data["hrp"]))
                   + pairing(c_(data["xlp"]), comm(data["frp"], data["hrp"]))
                   + pairing(data["fp"], comm(sinv(data["xrp"]), c_(data["hrp"]))
                             + comm(coth_map(q, data["xlp"]), c_(data["hrp"])))
                   - pairing(data["hp"], comm(sinv(data["xrp"]), c_(data["frp"]))
                             + comm(coth_map(q, data["xlp"]), c_(data["frp"]))))
            worst = max(worst, _rel(lhs, rhs))

            # Second pair: the q-gradient pairing and its companion.
            nab1f = fq - np.diag(np.real(np.diag(
                comm(coth_map(q, sinv(data["xrp"]))
                     + sinv(sinv(data["xlp"])), s_(data["frp"]))))).astype(complex)
            lhs2 = pairing(nab1f, np.diag(np.real(np.diag(d2h_m))))
            rhs2 = (pairing(fq, data["hp"])
                    + pairing(comm(coth_map(q, data["xrp"])
                                   + sinv(data["xlp"]), data["frp"]), data["hp"]))
            worst = max(worst, _rel(lhs2, rhs2))

            lhs3 = pairing(data["hp"],
                           comm(coth_map(q, data["xlp"])
                                + sinv(data["xrp"]), c_(data["frp"]))
                           + comm(data["xlp"], s_(data["frp"])))
            rhs3 = pairing(comm(coth_map(q, data["xrp"])
                                + sinv(data["xlp"]), data["frp"]), data["hp"])
            worst = max(worst, _rel(lhs3, rhs3))
            count += 1
    return count, worst


def suite_double_transport(cfg, rng):
    worst = 0.0
    count = 0
    pair_count = 20
    point_count = max(1, cfg.trials // 2)
    for n in _sizes(cfg):
        obs = [random_coordinate_observable(rng, n) for _ in range(8)]
        pairs = [(int(a), int(b))
                 for a, b in rng.integers(0, len(obs), size=(pair_count, 2))]
        for _ in range(point_count):
            x = random_near_identity_double(rng, n)
            res = transport_residuals(obs, pairs, x, step=cfg.fd_step)
            worst = max(worst, max(res))
            count += 1
    return count, worst


# Contracted suite names, in canonical order.  The two tolerance classes:
# "exact" thresholds respond to --tol-abs, "fd" thresholds to --tol-rel.
SUITES = {
    "jacobi-1": (suite_jacobi_canonical, 1e-5, "fd"),
    "jacobi-2": (suite_jacobi_quadratic, 1e-5, "fd"),
    "compatibility": (suite_compatibility, 1e-5, "fd"),
    "lie-derivative": (suite_lie_derivative, 1e-6, "fd"),
    "recursion": (suite_recursion, 1e-8, "exact"),
    "flows-conservation": (suite_flows_conservation, 1e-12, "exact"),
    "reduction-oracle": (suite_reduction_oracle, 1e-6, "fd"),
    "lemma33": (suite_gradient_reconstruction, 1e-6, "fd"),
    "theorem43": (suite_hermitian_slice, 1.0, "ratio"),
    "prop48": (suite_spin_change_of_variables, 1.0, "ratio"),
    "appendix-b": (suite_quartic_identity, 1e-10, "exact"),
    "appendix-c": (suite_spin_bracket_identities, 1e-10, "exact"),
    "double-transport": (suite_double_transport, 1e-5, "fd"),
}


def run_suite(cfg: VerificationConfig) -> VerificationReport:
    """Run the selected suites deterministically and assemble the report."""
    names = list(SUITES) if cfg.suites is None else list(cfg.suites)
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}")
    results = []
    order = list(SUITES)
    for name in order:
        if name not in names:
            continue
        runner, default_threshold, klass = SUITES[name]
        threshold = default_threshold
        if klass == "exact" and cfg.tol_abs is not None:
            threshold = cfg.tol_abs
        elif klass == "fd" and cfg.tol_rel is not None:
            threshold = cfg.tol_rel
        rng = np.random.default_rng([cfg.seed, order.index(name)])
        trials, max_residual = runner(cfg, rng)
        results.append(SuiteResult(name, trials, float(max_residual),
                                   float(threshold), max_residual < threshold))
    return VerificationReport(cfg, tuple(results))
