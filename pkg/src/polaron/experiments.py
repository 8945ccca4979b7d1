"""Sweeps over temperature and tilt, CSV/manifest emission and figure presets."""
from __future__ import annotations

import csv
import json
import os
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import drift_velocity, fit_esaki_tsu, fit_power_law_windows, msd
from .config import RunConfig, loads
from .coupling import build_coupling_table, g_function, system_constants
from .gme import build_kernel, check_phi_convergence, solve_gme, solve_gme_converged
from .selftrap import critical_alpha, trapping_report

SYSTEM_FIG3 = """\
[system]
impurity_mass_u = 41.0
boson_mass_u = 87.0
kappa_over_g = 2.58
dimension = 1
mean_spacing_nm = 200.0
lattice_spacing_nm = 395.0
lattice_depth_er = 12.0
hopping_er = 0.0245
healing_length_nm = 652.0
"""

PRESETS = {
    "fig3": SYSTEM_FIG3 + """
[solver]
t_final = 10.0

[sweep]
mode = "trajectories"
temperatures = [0.0, 5.0, 15.0]
tilts = [0.0]
""",
    "fig4": SYSTEM_FIG3 + """
[solver]
t_final = 10.0

[sweep]
mode = "temperature-scan"
temperatures = [0.0, 1.3636363636363635, 2.727272727272727, 4.090909090909091,
                5.454545454545454, 6.818181818181818, 8.181818181818182, 9.545454545454545,
                10.909090909090908, 12.272727272727272, 13.636363636363637, 15.0]
tilts = [0.0]
""",
    "fig5": SYSTEM_FIG3 + """
[solver]
t_final = 10.0

[sweep]
mode = "tilt-scan"
temperatures = [0.0, 5.0, 15.0]
tilts = [0.1, 0.14602865281773005, 0.21324368530041447, 0.31139635212488404,
         0.45472980964036306, 0.6640349376561584, 0.9696750474306436, 1.4159912316862916,
         2.0677330044296064, 3.0194568244633584, 4.409230941785548, 6.438690063718985,
         9.402233798751934, 13.729806036167627, 20.0]
t_d = 10.0
""",
    "selftrap-appc": SYSTEM_FIG3 + """
[sweep]
mode = "selftrap"
dimensions = [2, 3]
""",
}


def preset(name) -> RunConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return loads(PRESETS[name], name)


def fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([fmt(v) for v in row])


def prepare_out_dir(path, force=False):
    path = Path(path)
    if path.exists() and any(path.iterdir()) and not force:
        raise FileExistsError(f"output directory {path} exists and is not empty; use --force")
    path.mkdir(parents=True, exist_ok=True)
    return path


def default_out_root():
    return Path(os.environ.get("POLARON_OUT", "."))


def build_id():
    try:
        res = subprocess.run(["git", "describe", "--always", "--dirty"], cwd=Path(__file__).parent,
                             capture_output=True, text=True, timeout=5)
        if res.returncode == 0 and res.stdout.strip():
            return f"{__version__}+{res.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def tag(value):
    return f"{value:g}".replace(".", "p")


@dataclass
class PointResult:
    temperature: float
    tilt: float
    kernel: object
    traj: object
    msd: np.ndarray
    diagnostics: dict


def run_point(constants, cfg: RunConfig, temperature, tilt, check=False):
    sv = cfg.solver
    halving = None
    if sv.step_halving:
        kernel, traj, halving = solve_gme_converged(constants, temperature, tilt, sv.t_final, dt=sv.dt,
                                                    n_sites=sv.n_sites, tol=sv.halving_tol)
    else:
        kernel = build_kernel(constants, temperature, tilt, sv.t_final, dt=sv.dt)
        traj = solve_gme(kernel, n_sites=sv.n_sites)
    diag = {
        "temperature_over_Ep": temperature, "tilt": tilt, "dt": kernel.dt,
        "n_sites": traj.n_sites, "kernel_hash": kernel.hash,
        "norm_drift": traj.norm_drift, "min_P": traj.min_value, "boundary_P": traj.boundary,
        "Jt_over_J": kernel.hopping_ratio, "kernel_decay_time": kernel.decay_time,
        "grid_nodes": kernel.info["grid_nodes"], "grid_convergence": kernel.info["grid_convergence"],
    }
    if halving is not None:
        diag["halving_change"] = halving["halving_change"]
        diag["halving"] = [list(h) for h in halving["halving"]]
    if check:
        s_gn0 = kernel.s[::max(1, kernel.s.size // 50)] / constants.hopping
        diag["phi_grid_doubling_change"] = check_phi_convergence(constants, temperature, s_gn0, sv.phi_tol)
    return PointResult(temperature, tilt, kernel, traj, msd(traj), diag)


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _write_point(out, res: PointResult, stride, full=True):
    sub = out / f"T{tag(res.temperature)}_w{tag(res.tilt)}"
    sub.mkdir(exist_ok=True)
    t = res.traj.t
    idx = np.arange(0, t.size, stride)
    if idx[-1] != t.size - 1:
        idx = np.append(idx, t.size - 1)
    write_csv(sub / "msd.csv", ["t", "l2"], zip(t[idx], res.msd[idx]))
    files = [sub / "msd.csv"]
    if full:
        rows = ((t[i], j, p) for i in idx for j, p in zip(res.traj.sites, res.traj.P[i]))
        write_csv(sub / "trajectory.csv", ["t_hbar_over_J", "j", "P"], rows)
        k = res.kernel
        write_csv(sub / "kernel.csv", ["s_hbar_over_J", "W_plus", "W_minus"],
                  zip(k.s[idx], k.w_plus[idx], k.w_minus[idx]))
        files += [sub / "trajectory.csv", sub / "kernel.csv"]
    return files


def write_coupling(out, cfg: RunConfig, temperatures, r_over_xi=None):
    params = cfg.params()
    sc = system_constants(params)
    if r_over_xi is None:
        r_over_xi = np.arange(11) * sc.a_over_xi
    g = np.atleast_1d(g_function(r_over_xi, sc.sigma_over_xi, params.dimension))
    write_csv(out / "coupling.csv", ["r_over_xi", "G", "V_gn0"],
              zip(r_over_xi, g, 2 * sc.strength * g))
    rows = []
    for T in temperatures:
        table = build_coupling_table(params.with_(temperature=T), separations=[0], tol=cfg.solver.grid_tol)
        rows.append((T, table.level_shift_nK, table.level_shift, table.hopping_ratio))
    write_csv(out / "coupling_scalars.csv", ["T_over_Ep", "E_p_nK", "E_p_gn0", "Jt_over_J"], rows)
    return [out / "coupling.csv", out / "coupling_scalars.csv"]


PLOT_MSD = """set datafile separator ","
set logscale xy
set xlabel "t [hbar/J]"
set ylabel "mean-square displacement [sites^2]"
set key left top
plot {series}
pause -1
"""


def _plot_msd(out, points):
    series = ", \\\n     ".join(
        f'"{p}/msd.csv" every ::1 using 1:2 with lines title "{p}"' for p in points)
    (out / "plot_msd.gp").write_text(PLOT_MSD.format(series=series))
    return out / "plot_msd.gp"


def _run_transport(cfg, out, threads, check):
    params = cfg.params()
    sc = system_constants(params)
    sw = cfg.sweep
    tilts = sw.tilts if sw.mode != "temperature-scan" else [0.0]
    grid = [(T, w) for T in sw.temperatures for w in tilts]
    # Phi does not depend on the tilt: check its grid convergence once per temperature
    first = {T: i for i, (T, _) in reversed(list(enumerate(grid)))}

    def task(i):
        T, w = grid[i]
        return run_point(sc, cfg, T, w, check=check and first[T] == i)

    results = _map(task, range(len(grid)), threads)
    files = []
    for res in results:
        files += _write_point(out, res, cfg.output.stride, full=sw.mode == "trajectories")
    summary = []
    for res in results:
        full, late = fit_power_law_windows(res.traj.t, res.msd)
        res.diagnostics["alpha_full"] = full["alpha"]
        res.diagnostics["alpha_late"] = late["alpha"]
        vd = drift_velocity(res.traj, sw.t_d) if sw.t_d <= res.traj.t[-1] + 1e-12 else float("nan")
        res.diagnostics["vd_over_v0"] = vd
        summary.append((res.temperature, res.tilt, full["alpha"], late["alpha"], vd,
                        res.traj.norm_drift, res.traj.min_value, res.traj.boundary))
    write_csv(out / "transport_summary.csv",
              ["T_over_Ep", "omegaB_hbar_over_J", "alpha_full", "alpha_late", "vd_over_v0",
               "norm_drift", "min_P", "boundary_P"], summary)
    files.append(out / "transport_summary.csv")
    files += write_coupling(out, cfg, sw.temperatures)
    if sw.mode == "temperature-scan":
        rows = []
        for res in results:
            full, late = fit_power_law_windows(res.traj.t, res.msd)
            rows.append((res.temperature, full["alpha"], late["alpha"], full["A"], late["A"]))
        write_csv(out / "alpha_vs_T.csv", ["T_over_Ep", "alpha_full", "alpha_late", "A_full", "A_late"], rows)
        files.append(out / "alpha_vs_T.csv")
    fits = []
    if sw.mode == "tilt-scan":
        rows = []
        for T in sw.temperatures:
            pts = [r for r in results if r.temperature == T]
            w = np.array([r.tilt for r in pts])
            v = np.array([r.diagnostics["vd_over_v0"] for r in pts])
            sub = out / f"T{tag(T)}"
            sub.mkdir(exist_ok=True)
            write_csv(sub / "iv_curve.csv", ["omegaB_hbar_over_J", "vd_over_v0"], zip(w, v))
            files.append(sub / "iv_curve.csv")
            fit = fit_esaki_tsu(w, v, pts[0].kernel.hopping_ratio, sc.hopping)
            rows.append((T, fit["tau"], fit["gamma"], fit.residual_norm))
            fits.append({"T_over_Ep": T, "tau_over_tau0": fit["tau"], "gamma": fit["gamma"],
                         "errors": fit.errors, "residual_norm": fit.residual_norm,
                         "residual_rms": fit.residual_rms, "peak_vd": float(v.max()),
                         "ok": fit.ok, "flags": fit.flags, "Jt_over_J": pts[0].kernel.hopping_ratio})
        write_csv(out / "esaki_fit.csv", ["T_over_Ep", "tau_over_tau0", "gamma", "residual"], rows)
        files.append(out / "esaki_fit.csv")
    if cfg.output.plots:
        files.append(_plot_msd(out, [f"T{tag(r.temperature)}_w{tag(r.tilt)}" for r in results]))
        if sw.mode == "temperature-scan":
            (out / "plot_alpha.gp").write_text(
                'set xlabel "k_B T / E_p"\nset ylabel "alpha"\nset datafile separator ","\n'
                'plot "alpha_vs_T.csv" every ::1 using 1:4 with linespoints title "late window", \\\n'
                '     "alpha_vs_T.csv" every ::1 using 1:2 with linespoints title "full window"\npause -1\n')
            files.append(out / "plot_alpha.gp")
        if sw.mode == "tilt-scan":
            series = ", \\\n     ".join(
                f'"T{tag(T)}/iv_curve.csv" every ::1 using 1:2 with linespoints title "T = {T:g} E_p"'
                for T in sw.temperatures)
            (out / "plot_iv.gp").write_text(
                'set logscale x\nset datafile separator ","\nset xlabel "hbar omega_B / J"\n'
                f'set ylabel "v_d / v_0"\nplot {series}\npause -1\n')
            files.append(out / "plot_iv.gp")
    return files, {"points": [r.diagnostics for r in results], "esaki_fits": fits,
                   "level_shift_nK": sc.level_shift_nK, "hopping_gn0": sc.hopping,
                   "alpha": sc.alpha}


def _run_selftrap(cfg, out):
    rows = []
    crit = {}
    for D in cfg.sweep.dimensions:
        c = critical_alpha(int(D))
        crit[int(D)] = c
        rows.append((int(D), c.alpha_c, c.sigma_at_threshold, c.bracket[0], c.bracket[1]))
    write_csv(out / "selftrap_critical.csv",
              ["dimension", "alpha_prime_critical", "sigma_at_threshold_over_xi", "bracket_lo", "bracket_hi"], rows)
    report = trapping_report(cfg.params().with_(dimension=1)) if cfg.params().dimension == 1 else None
    return [out / "selftrap_critical.csv"], {
        "critical": {str(D): {"alpha_prime_c": c.alpha_c, "sigma_at_threshold": c.sigma_at_threshold,
                              "iterations": c.iterations} for D, c in crit.items()},
        "system_report": report,
    }


def run_config(cfg: RunConfig, out_dir, force=False, threads=1, tol=None, command=None):
    """Execute one configuration, writing CSVs and ``manifest.json`` into ``out_dir``."""
    if tol is not None:
        if tol <= 0:
            from .errors import ConfigError

            raise ConfigError("--tol", "must be strictly positive")
        cfg.solver.grid_tol = float(tol)
    out = prepare_out_dir(out_dir, force)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    if cfg.sweep.mode == "selftrap":
        files, diag = _run_selftrap(cfg, out)
    else:
        files, diag = _run_transport(cfg, out, threads, cfg.solver.check_convergence)
    manifest = {
        "name": cfg.name,
        "command": command,
        "build": build_id(),
        "started": started,
        "wall_time_s": time.perf_counter() - t0,
        "config": cfg.to_dict(),
        "diagnostics": diag,
        "files": sorted(str(Path(f).relative_to(out)) for f in files),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=_json_default)
        fh.write("\n")
    return manifest


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def run_preset(name, out_dir=None, force=False, threads=1, tol=None):
    cfg = preset(name)
    if out_dir is None:
        out_dir = default_out_root() / name
    return run_config(cfg, out_dir, force=force, threads=threads, tol=tol, command=name)
