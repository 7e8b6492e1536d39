"""Command-line entry point: ``pilotwave simulate | verify-algebra | errata``."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .classical import BogoliubovParams
from .config import config_from_pairs, read_pairs
from .errors import ConfigError, PilotWaveError, TruncationError
from .fock import (FockSpace, bogoliubov_residual, eigen_defect, squeeze_budget, squeeze_matrix,
                   squeezed_number_state, unitarity_defect)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
ALGEBRA_TOL = 1e-6


def _float_list(text):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pilotwave", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and write CSV/JSON outputs")
    sim.add_argument("--config", type=Path, help="scenario file (key = value lines)")
    sim.add_argument("--preset", help="override the preset")
    kind = sim.add_mutually_exclusive_group()
    kind.add_argument("--alpha", type=float, help="coherent-state amplitude (real)")
    kind.add_argument("--n", type=int, help="invariant eigenstate index")
    sim.add_argument("--sigma", type=float)
    sim.add_argument("--q0", help="comma-separated initial positions")
    sim.add_argument("--t-max", type=float)
    sim.add_argument("--out-dir")
    sim.add_argument("--emit-plot-script", action="store_true")
    sim.add_argument("--workers", type=int, default=None, help="threads for ensemble members")

    alg = sub.add_parser("verify-algebra", help="print truncated Fock-space residual tables")
    alg.add_argument("--sigma-list", type=_float_list, default=[0.25, 0.5, 1.0])
    alg.add_argument("--theta-v", type=float, default=0.0)
    alg.add_argument("--dim", type=int, help="Fock dimension (default: 64, or 128 when e^(2 sigma) demands it)")
    alg.add_argument("--k", type=int, default=16, help="number of low Fock states in the projector")
    alg.add_argument("--converge", action="store_true",
                     help="double the dimension until the residual is below tolerance (max 1024)")

    err = sub.add_parser("errata", help="compare the square-root and squared-envelope damped-squeezed trajectories")
    err.add_argument("--sigma", type=float, default=0.5)
    err.add_argument("--gamma", type=float, default=0.1)
    err.add_argument("--omega0", type=float, default=1.0)
    err.add_argument("--q0", type=float, default=1.0)
    err.add_argument("--t-max", type=float, default=20.0)
    err.add_argument("--rows", type=int, default=11)
    return parser


def _simulate_config(args):
    pairs = read_pairs(args.config.read_text(encoding="utf-8")) if args.config else {}
    overrides = {
        "preset": args.preset,
        "sigma": None if args.sigma is None else repr(args.sigma),
        "q0": args.q0,
        "t_max": None if args.t_max is None else repr(args.t_max),
        "out_dir": args.out_dir,
        "emit_plot_script": "true" if args.emit_plot_script else None,
    }
    if args.alpha is not None or args.n is not None:
        pairs.pop("alpha", None)
        pairs.pop("n", None)
        overrides["alpha" if args.alpha is not None else "n"] = repr(
            args.alpha if args.alpha is not None else args.n)
    for key, value in overrides.items():
        if value is not None:
            pairs[key] = (value, None)
    return config_from_pairs(pairs)


def cmd_simulate(args) -> int:
    from .harness import run_scenario

    try:
        if args.config is not None and not args.config.is_file():
            raise ConfigError(f"config file not found: {args.config}")
        cfg = _simulate_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_scenario(cfg, workers=args.workers)
    except PilotWaveError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    width = max(len(k) for k in report.checks)
    for name, check in report.checks.items():
        verdict = "pass" if check.passed else "FAIL"
        tol = "-" if check.tolerance is None else f"{check.tolerance:.0e}"
        print(f"{name:<{width}}  {check.value:10.3e}  tol {tol:>6}  {verdict}")
        if check.note:
            print(f"{'':<{width}}  note: {check.note}")
    print(f"outputs in {cfg.out_dir}: {', '.join(report.files)}")
    return report.exit_code


def _auto_dim(sigma):
    return 64 if squeeze_budget(sigma) <= 64 else 128


def _algebra_row(sigma, theta_v, dim, k, converge):
    params = BogoliubovParams.from_squeeze(sigma, 0.0, theta_v)
    while True:
        space = FockSpace(dim)
        res = bogoliubov_residual(space, params, k=k)
        if res < ALGEBRA_TOL or not converge or dim >= 1024:
            break
        dim *= 2
    S = squeeze_matrix(space, params)
    vac = S.conj().T @ space.basis(0).amplitudes
    number = max(eigen_defect(space, params, squeezed_number_state(space, params, n), n)
                 for n in (0, 1, 2) if n <= dim // 8)
    return dim, res, unitarity_defect(S), float(np.max(np.abs(vac[1::2]))), number


def cmd_verify_algebra(args) -> int:
    print(f"{'sigma':>6} {'dim':>5} {'k':>3} {'residual':>10} {'unitarity':>10} "
          f"{'parity':>10} {'number':>10}  verdict")
    all_ok = True
    for sigma in args.sigma_list:
        try:
            dim, res, unit, parity, number = _algebra_row(
                sigma, args.theta_v, args.dim or _auto_dim(sigma), args.k, args.converge)
        except (TruncationError, ValueError) as exc:
            print(f"{sigma:6.3g}  error: {exc}")
            all_ok = False
            continue
        ok = res < ALGEBRA_TOL
        all_ok &= ok
        print(f"{sigma:6.3g} {dim:5d} {args.k:3d} {res:10.3e} {unit:10.3e} {parity:10.3e} "
              f"{number:10.3e}  {'pass' if ok else 'FAIL'}")
    return EXIT_OK if all_ok else EXIT_CHECK


def errata_table(sigma, gamma, omega0, q0, t_max, rows):
    """Rows ``(t, derived, squared, oracle)`` for the damped-squeezed eigenstate."""
    from .config import ScenarioConfig
    from .harness import build_scenario, damped_squeezed_forms
    from .trajectory import guidance_integrate

    cfg = ScenarioConfig(preset="damped-squeezed", omega0=omega0, gamma=gamma, sigma=sigma, n=0,
                         q0=(q0,), t_max=t_max)
    scn = build_scenario(cfg)
    times = np.linspace(0.0, t_max, rows)
    oracle = guidance_integrate(scn.state, q0, (0.0, t_max), t_eval=times).q
    derived, squared = damped_squeezed_forms(scn, q0, times)
    return times, derived, squared, oracle


def cmd_errata(args) -> int:
    if not args.omega0 > args.gamma >= 0 or args.sigma < 0 or args.rows < 2:
        print("configuration error: need omega0 > gamma >= 0, sigma >= 0, rows >= 2", file=sys.stderr)
        return EXIT_CONFIG
    try:
        t, derived, squared, oracle = errata_table(args.sigma, args.gamma, args.omega0, args.q0,
                                                   args.t_max, args.rows)
    except PilotWaveError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print("damped-squeezed eigenstate trajectory, "
          f"sigma={args.sigma}, gamma={args.gamma}, omega0={args.omega0}, q0={args.q0}")
    print("derived: q0 e^(-gamma t) sqrt(cos^2 Wt + e^(-4 sigma) sin^2 Wt)")
    print("squared: q0 e^(-2 gamma t) (cos^2 Wt + e^(-4 sigma) sin^2 Wt)")
    print(f"{'t':>8} {'derived':>14} {'squared':>14} {'oracle':>14}")
    for row in zip(t, derived, squared, oracle):
        print("{:8.3f} {:14.8f} {:14.8f} {:14.8f}".format(*row))
    dev_derived = float(np.max(np.abs(oracle - derived)))
    dev_squared = float(np.max(np.abs(oracle - squared)))
    print(f"max |oracle - derived| = {dev_derived:.3e}")
    print(f"max |oracle - squared| = {dev_squared:.3e}")
    scale = max(1e-2, abs(args.q0))
    return EXIT_OK if math.isfinite(dev_derived) and dev_derived <= 1e-6 * scale else EXIT_CHECK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"simulate": cmd_simulate, "verify-algebra": cmd_verify_algebra, "errata": cmd_errata}
    return handler[args.command](args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
