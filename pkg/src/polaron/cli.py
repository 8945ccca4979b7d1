"""Command-line entry point: figure presets, single runs and TOML configs.

Exit codes: 0 success, 2 invalid input or configuration, 3 solver invariant
or convergence failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .config import load
from .errors import ConfigError, ConvergenceError, ParameterError, SolverInvariantError

EXIT_INPUT = 2
EXIT_SOLVER = 3


def _out_dir(args, default_name, cfg=None):
    if args.out:
        return Path(args.out)
    if cfg is not None and cfg.output.directory:
        return Path(cfg.output.directory)
    return ex.default_out_root() / default_name


def cmd_preset(args):
    cfg = ex.preset(args.command)
    ex.run_config(cfg, _out_dir(args, args.command), force=args.force, threads=args.threads,
                  tol=args.tol, command=args.command)


def cmd_run(args):
    cfg = load(args.config)
    ex.run_config(cfg, _out_dir(args, cfg.name, cfg), force=args.force, threads=args.threads,
                  tol=args.tol, command=f"run {args.config}")


def cmd_gme(args):
    cfg = ex.preset("fig3")
    cfg.name = "gme"
    cfg.solver.t_final = args.t_final
    cfg.solver.dt = args.dt
    cfg.solver.n_sites = args.n_sites
    cfg.sweep.temperatures = [args.temperature]
    cfg.sweep.tilts = [args.tilt]
    cfg.sweep.t_d = args.t_final
    cfg.output.plots = False
    if args.kappa_over_g is not None:
        cfg.system["kappa_over_g"] = args.kappa_over_g
    for name in ("dt", "t_final"):
        value = getattr(cfg.solver, name)
        if value is not None and value <= 0:
            raise ConfigError(f"solver.{name}", "must be strictly positive")
    ex.run_config(cfg, _out_dir(args, "gme"), force=args.force, threads=1, tol=args.tol, command="gme")


def cmd_coupling(args):
    from .coupling import system_constants

    cfg = ex.preset("fig3")
    if args.kappa_over_g is not None:
        cfg.system["kappa_over_g"] = args.kappa_over_g
    if args.tol is not None:
        cfg.solver.grid_tol = args.tol
    out = ex.prepare_out_dir(_out_dir(args, "coupling"), args.force)
    sc = system_constants(cfg.params())
    r = np.linspace(0.0, args.r_max, args.points) if args.r_max else None
    ex.write_coupling(out, cfg, args.temperature, r)
    print(f"E_p = {sc.level_shift_nK:.4f} nK ({sc.level_shift:.6f} gn0), wrote {out}")


def cmd_selftrap(args):
    from .model import fig3_params
    from .selftrap import alpha_prime, critical_alpha, minimize_energy

    params = fig3_params()
    ap = alpha_prime(params) if args.alpha_prime is None else args.alpha_prime
    if ap < 0:
        raise ParameterError("alpha' must be non-negative")
    out = ex.prepare_out_dir(_out_dir(args, "selftrap"), args.force)
    res = minimize_energy(ap, args.dimension)
    ratio = params.boson_mass / params.impurity_mass
    sig, e = res.scan
    ex.write_csv(out / "energy.csv", ["sigma_over_xi", "E_gn0"], zip(sig, ratio * e))
    crit = critical_alpha(args.dimension).alpha_c
    ex.write_csv(out / "summary.csv", ["bound", "sigma_star", "alpha_prime", "alpha_prime_critical", "metastable"],
                 [(res.bound, res.sigma_star, ap, crit, res.metastable)])
    state = f"bound at sigma*/xi = {res.sigma_star:.4f}" if res.bound else "unbound"
    print(f"D = {args.dimension}, alpha' = {ap:.4g}: {state} (alpha'_c = {crit:.4g})")


def build_parser():
    def flags(suppress):
        # subcommand copies must not clobber values given before the subcommand
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--out", default=d(None), help="output directory (default $POLARON_OUT/<command>)")
        p.add_argument("--force", action="store_true", default=d(False),
                       help="overwrite a non-empty output directory")
        p.add_argument("--threads", type=int, default=d(1), help="worker threads for sweeps")
        p.add_argument("--tol", type=float, default=d(None), help="relative tolerance for the phonon grid")
        return p

    common = flags(True)
    ap = argparse.ArgumentParser(prog="polaron", description=__doc__.splitlines()[0], parents=[flags(False)])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in [("fig3", "trajectories at T/E_p = 0, 5, 15"),
                       ("fig4", "MSD exponent over a 12-point temperature scan"),
                       ("fig5", "drift velocity vs tilt and Esaki-Tsu fits"),
                       ("selftrap-appc", "critical self-trapping couplings in 2D and 3D")]:
        sub.add_parser(name, help=text, parents=[common]).set_defaults(func=cmd_preset)

    p = sub.add_parser("run", help="run a TOML configuration", parents=[common])
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gme", help="single trajectory with kernel dump", parents=[common])
    p.add_argument("--temperature", type=float, default=0.0, help="k_B T / E_p")
    p.add_argument("--tilt", type=float, default=0.0, help="hbar omega_B / J")
    p.add_argument("--t-final", type=float, default=10.0, help="hbar/J")
    p.add_argument("--dt", type=float)
    p.add_argument("--n-sites", type=int)
    p.add_argument("--kappa-over-g", type=float)
    p.set_defaults(func=cmd_gme)

    p = sub.add_parser("coupling", help="G(r), V(r), E_p and J~/J", parents=[common])
    p.add_argument("--temperature", type=float, nargs="+", default=[0.0, 5.0, 15.0])
    p.add_argument("--kappa-over-g", type=float)
    p.add_argument("--r-max", type=float, help="sample r/xi uniformly up to this value instead of lattice sites")
    p.add_argument("--points", type=int, default=61)
    p.set_defaults(func=cmd_coupling)

    p = sub.add_parser("selftrap", help="variational self-trapping energy curve", parents=[common])
    p.add_argument("--alpha-prime", type=float)
    p.add_argument("--dimension", type=int, choices=(1, 2, 3), default=3)
    p.set_defaults(func=cmd_selftrap)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        args.func(args)
    except (ConfigError, ParameterError, FileExistsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverInvariantError, ConvergenceError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return 0


if __name__ == "__main__":
    sys.exit(main())
