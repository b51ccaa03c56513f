"""Command-line front end.

Verbs: verify (randomized suites, JSON/CSV report), flow (closed-form
spectral flow with conservation columns), rflow (reduced vector-field
integration), reduce (project a phase point to the slice), spin (slice to
spin coordinates and back), bracket (evaluate a named bracket of two named
observables), double-check (factorization-transport residuals).

Exit codes: 0 success or verification pass, 1 verification failure,
2 usage or input error.  Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import serialize
from .brackets import CANONICAL, QUADRATIC, BracketSelector, pb
from .double import transport_residuals
from .flows import (
    conservation_report,
    explicit_flow,
    flow_spec,
    spectral_numeric_flow,
    spectral_values,
)
from .observables import parse_observable
from .reduction import (
    SpectralReduced,
    integrate_reduced,
    project_to_slice,
)
from .sampling import (
    random_coordinate_observable,
    random_near_identity_double,
)
from .spin import from_spin, spin_hamiltonian_2, to_spin
from .verify import SUITES, VerificationConfig, run_suite


class InputError(Exception):
    """Bad user input: maps to exit code 2."""


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {path}: {exc}") from exc


def _write_output(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _parse_selector(text: str) -> BracketSelector:
    if text == "canonical" or text == "1":
        return CANONICAL
    if text == "quadratic" or text == "2":
        return QUADRATIC
    try:
        a_s, b_s = text.split(",")
        return BracketSelector(float(a_s), float(b_s))
    except ValueError as exc:
        raise InputError(
            f"bad bracket {text!r}: expected canonical, quadratic or 'a,b'"
        ) from exc


def _seed_default() -> int:
    env = os.environ.get("BIHAMKIT_SEED")
    return int(env) if env else 0


def _cmd_verify(args) -> int:
    suites = None
    if args.suites:
        suites = tuple(s.strip() for s in args.suites.split(",") if s.strip())
    cfg = VerificationConfig(
        n=args.n, trials=args.trials, seed=args.seed,
        tol_abs=args.tol_abs, tol_rel=args.tol_rel,
        fd_step=args.fd_step, suites=suites,
    )
    report = run_suite(cfg)
    text = report.to_csv_text() if args.format == "csv" else report.to_json_text()
    _write_output(text, args.out)
    for r in report.results:
        status = "pass" if r.passed else "FAIL"
        print(f"{r.suite}: {status} (max residual {r.max_residual:.3e}, "
              f"threshold {r.threshold:.1e})", file=sys.stderr)
    return 0 if report.passed else 1


def _cmd_flow(args) -> int:
    x0 = serialize.phase_point_from_json(_load_json(args.input))
    n = x0.g.shape[0]
    sel = CANONICAL if args.bracket == "canonical" else QUADRATIC
    if args.numeric:
        spec = flow_spec(args.k, args.kind, sel, args.t, args.steps)
        samples = min(args.steps, 10)
        ts = np.linspace(0.0, args.t, samples + 1)
        traj = [x0]
        per = max(1, args.steps // samples)
        for i in range(1, ts.size):
            dt = float(ts[i] - ts[i - 1])
            traj.append(spectral_numeric_flow(
                traj[-1], flow_spec(spec.k, spec.kind, sel, dt, per)))
    else:
        ts = np.linspace(0.0, args.t, args.steps + 1)
        traj = [explicit_flow(x0, args.k, args.kind, float(t)) for t in ts]
    drift = conservation_report(traj)
    names = [f"H_{k}" for k in range(1, n + 1)] + \
            [f"Ht_{k}" for k in range(1, n + 1)]
    header = ["t"] + names + ["drift_H", "drift_Ht", "drift_Jtilde"]
    if args.points:
        for part in ("g", "J"):
            for a in range(n):
                for b in range(n):
                    header += [f"{part}_re_{a + 1}{b + 1}", f"{part}_im_{a + 1}{b + 1}"]
    lines = [",".join(header)]
    base = spectral_values(traj[0], n)
    running_h = 0.0
    running_ht = 0.0
    running_jt = 0.0
    for t, x in zip(ts, traj):
        vals = spectral_values(x, n)
        running_h = max([running_h] + [abs(vals[f"H_{k}"] - base[f"H_{k}"])
                                       for k in range(1, n + 1)])
        running_ht = max([running_ht] + [abs(vals[f"Ht_{k}"] - base[f"Ht_{k}"])
                                         for k in range(1, n + 1)])
        running_jt = drift["Jtilde"]
        row = [f"{t!r}"] + [f"{vals[name]!r}" for name in names]
        row += [f"{running_h!r}", f"{running_ht!r}", f"{running_jt!r}"]
        if args.points:
            for m in (x.g, x.J):
                for a in range(n):
                    for b in range(n):
                        row += [f"{m[a, b].real!r}", f"{m[a, b].imag!r}"]
        lines.append(",".join(row))
    _write_output("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_rflow(args) -> int:
    y0 = serialize.reduced_point_from_json(_load_json(args.input))
    n = y0.q.size
    h = SpectralReduced(args.k, args.kind)
    bracket = "canonical" if args.bracket == "canonical" else "quadratic"
    ts = np.linspace(0.0, args.t, args.samples + 1)
    header = ["t"] + [f"q_{i + 1}" for i in range(n)]
    header += [f"eig_re_{i + 1}" for i in range(n)]
    header += [f"eig_im_{i + 1}" for i in range(n)]
    header += [f"h_{k}_drift" for k in range(1, n + 1)]
    lines = [",".join(header)]
    base = [SpectralReduced(k, "real").value(y0) for k in range(1, n + 1)]
    steps_per = max(1, args.steps // max(1, args.samples))
    y = y0
    for idx, t in enumerate(ts):
        if idx > 0:
            dt = float(ts[idx] - ts[idx - 1])
            y = integrate_reduced(h, bracket, y, dt, steps_per)
        eig = np.sort_complex(np.linalg.eigvals(y.J))
        drifts = [abs(SpectralReduced(k, "real").value(y) - base[k - 1])
                  for k in range(1, n + 1)]
        row = [f"{t!r}"] + [f"{v!r}" for v in y.q]
        row += [f"{e.real!r}" for e in eig] + [f"{e.imag!r}" for e in eig]
        row += [f"{d!r}" for d in drifts]
        lines.append(",".join(row))
    _write_output("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_reduce(args) -> int:
    x = serialize.phase_point_from_json(_load_json(args.input))
    y = project_to_slice(x)
    _write_output(json.dumps(serialize.reduced_point_to_json(y), indent=2),
                  args.out)
    return 0


def _cmd_spin(args) -> int:
    data = _load_json(args.input)
    if args.from_spin:
        s = serialize.spin_from_json(data)
        y = from_spin(s)
        out = {
            "reduced": serialize.reduced_point_to_json(y),
            "energy_two_spin": spin_hamiltonian_2(s),
        }
    else:
        y = serialize.reduced_point_from_json(data)
        s = to_spin(y)
        out = {
            "spin": serialize.spin_to_json(s),
            "energy_two_spin": spin_hamiltonian_2(s),
            "energy_quadratic": SpectralReduced(2, "real").value(y),
        }
    _write_output(json.dumps(out, indent=2), args.out)
    return 0


def _cmd_bracket(args) -> int:
    x = serialize.phase_point_from_json(_load_json(args.point))
    n = x.g.shape[0]
    sel = _parse_selector(args.bracket)
    try:
        f = parse_observable(args.f, n)
        h = parse_observable(args.h, n)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    value = pb(sel, f, h, x)
    _write_output(repr(value), args.out)
    return 0


def _cmd_double_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    out = {}
    worst = 0.0
    for n in sorted({2, args.n}):
        obs = [random_coordinate_observable(rng, n) for _ in range(8)]
        pairs = [(int(a), int(b))
                 for a, b in rng.integers(0, len(obs), size=(args.pairs, 2))]
        residuals = []
        for _ in range(args.points):
            x = random_near_identity_double(rng, n)
            residuals.extend(transport_residuals(obs, pairs, x))
        out[f"n={n}"] = {"max_residual": max(residuals),
                         "pairs": args.pairs, "points": args.points}
        worst = max(worst, max(residuals))
    out["pass"] = worst < args.tol
    out["threshold"] = args.tol
    _write_output(json.dumps(out, indent=2, sort_keys=True), args.out)
    return 0 if out["pass"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bihamkit",
        description="Numerical checks for a bi-Hamiltonian hierarchy and its "
                    "unitary reduction to spin Sutherland models.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("verify", help="run randomized verification suites")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=_seed_default())
    p.add_argument("--tol-abs", type=float, default=None,
                   help="override threshold of the closed-form suites")
    p.add_argument("--tol-rel", type=float, default=None,
                   help="override threshold of the finite-difference suites")
    p.add_argument("--fd-step", type=float, default=1e-5)
    p.add_argument("--suites", type=str, default=None,
                   help=f"comma list from: {', '.join(SUITES)}")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("flow", help="spectral flow with conservation columns, CSV")
    p.add_argument("--input", required=True, help="JSON phase point {g, J}")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--kind", choices=("real", "imag"), default="real")
    p.add_argument("--bracket", choices=("canonical", "quadratic"),
                   default="quadratic",
                   help="driving bracket for --numeric; the closed form is shared")
    p.add_argument("--t", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=10,
                   help="output samples (closed form) or integrator steps (--numeric)")
    p.add_argument("--numeric", action="store_true",
                   help="integrate the matching spectral Hamiltonian instead "
                        "of evaluating the closed form")
    p.add_argument("--points", action="store_true",
                   help="append the full point per sample")
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("rflow", help="integrate a reduced spectral field, CSV")
    p.add_argument("--input", required=True, help="JSON reduced point {q, J}")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--kind", choices=("real", "imag"), default="real")
    p.add_argument("--bracket", choices=("canonical", "quadratic"),
                   default="quadratic")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=100, help="integrator steps")
    p.add_argument("--samples", type=int, default=10, help="output samples")
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=_cmd_rflow)

    p = sub.add_parser("reduce", help="project a phase point to the slice")
    p.add_argument("--input", required=True)
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("spin", help="slice point to spin coordinates and back")
    p.add_argument("--input", required=True)
    p.add_argument("--from-spin", action="store_true", dest="from_spin")
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=_cmd_spin)

    p = sub.add_parser("bracket", help="evaluate a bracket of two observables")
    p.add_argument("--bracket", default="canonical",
                   help="canonical, quadratic or 'a,b'")
    p.add_argument("--f", required=True, help="observable spec, e.g. H:2")
    p.add_argument("--h", required=True, help="observable spec, e.g. Jk:1,2,re")
    p.add_argument("--point", required=True, help="JSON phase point")
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=_cmd_bracket)

    p = sub.add_parser("double-check",
                       help="factorization-transport residuals, JSON output")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--seed", type=int, default=_seed_default())
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=_cmd_double_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
