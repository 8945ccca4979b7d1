"""Observables and fits on lattice trajectories."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, SolverInvariantError

MIN_POINTS = 8
MIN_ESAKI_POINTS = 6


@dataclass
class FitResult:
    kind: str
    params: dict
    errors: dict
    residual_norm: float
    residual_rms: float
    window: tuple
    ok: bool = True
    flags: list = field(default_factory=list)
    trace: list = field(default_factory=list)

    def __getitem__(self, key):
        return self.params[key]


def msd(traj):
    """Mean-square displacement sum_j j^2 P_j(t) in site^2."""
    j = np.asarray(traj.sites, dtype=float)
    return np.asarray(traj.P) @ (j * j)


def fit_power_law(t, y, window=None):
    """Least-squares line in log-log coordinates: y = A t^alpha."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    lo, hi = window if window is not None else (0.0, np.inf)
    sel = (t >= lo) & (t <= hi) & (t > 0)
    if sel.sum() < MIN_POINTS:
        raise ParameterError(f"power-law window holds {int(sel.sum())} points, need {MIN_POINTS}")
    if np.any(y[sel] <= 0):
        raise ParameterError("power-law fit needs strictly positive data in the window")
    x, v = np.log(t[sel]), np.log(y[sel])
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, v, rcond=None)
    resid = v - design @ coef
    dof = max(x.size - 2, 1)
    cov = np.linalg.inv(design.T @ design) * (resid @ resid) / dof
    log_a, alpha = coef
    res = FitResult(
        kind="power-law",
        params={"A": float(np.exp(log_a)), "alpha": float(alpha)},
        errors={"A": float(np.exp(log_a) * np.sqrt(cov[0, 0])), "alpha": float(np.sqrt(cov[1, 1]))},
        residual_norm=float(np.linalg.norm(resid)),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        window=(float(t[sel][0]), float(t[sel][-1])),
    )
    if not 0.5 <= alpha <= 2.5:
        res.ok = False
        res.flags.append("out-of-model exponent")
    return res


def fit_power_law_windows(t, y):
    """Fits over the whole run (t > 0) and over its second half."""
    t = np.asarray(t, dtype=float)
    full = fit_power_law(t, y)
    late = fit_power_law(t, y, window=(0.5 * t[-1], t[-1]))
    return full, late


def drift_velocity(traj, t_d=None):
    """v_d / v0 with v0 = J a / hbar; positive for motion toward lower site energy."""
    if traj.boundary >= 1e-6:
        raise SolverInvariantError(f"boundary occupation {traj.boundary:.3g}: drift unreliable")
    if t_d is None:
        t_d = traj.t[-1]
    if t_d <= 0:
        raise ParameterError("t_d must be positive")
    mean_j = float(traj.at(t_d) @ traj.sites)
    return -mean_j / t_d


def esaki_tsu(tilt, tau, gamma, hopping_ratio, hopping_gn0):
    """v_d / v0 = 2 gamma (J~/J) w tau / (1 + (w tau)^2), w in gn0/hbar and tau in hbar/gn0."""
    wt = np.asarray(tilt, dtype=float) * hopping_gn0 * tau
    return 2.0 * gamma * hopping_ratio * wt / (1.0 + wt * wt)


def fit_esaki_tsu(tilt, vd, hopping_ratio, hopping_gn0, tau_range=(1e-2, 1e2), n_grid=400, max_iter=100):
    """Fit (tau, gamma) of the Esaki-Tsu curve; tau in hbar/gn0.

    A log grid in tau with the linear gamma solved exactly at each point
    seeds a Gauss-Newton refinement in (log tau, gamma).
    """
    tilt = np.asarray(tilt, dtype=float)
    vd = np.asarray(vd, dtype=float)
    if tilt.size < MIN_ESAKI_POINTS:
        raise ParameterError(f"need at least {MIN_ESAKI_POINTS} points")
    order = np.argsort(tilt)
    tilt, vd = tilt[order], vd[order]
    flags = []
    peak = int(np.argmax(vd))
    if peak in (0, tilt.size - 1):
        flags.append("data do not bracket the peak")

    def shape(tau):
        return esaki_tsu(tilt, tau, 1.0, hopping_ratio, hopping_gn0)

    def best_gamma(tau):
        f = shape(tau)
        g = (f @ vd) / (f @ f)
        return g, np.linalg.norm(vd - g * f)

    taus = np.geomspace(*tau_range, n_grid)
    costs = [best_gamma(tau)[1] for tau in taus]
    tau = taus[int(np.argmin(costs))]
    gamma = best_gamma(tau)[0]
    x = np.array([np.log(tau), gamma])
    trace = [float(min(costs))]

    def residual(p):
        return vd - esaki_tsu(tilt, np.exp(p[0]), p[1], hopping_ratio, hopping_gn0)

    def jacobian(p):
        t, g = np.exp(p[0]), p[1]
        wt = tilt * hopping_gn0 * t
        base = 2.0 * hopping_ratio * wt / (1.0 + wt * wt)
        dlog = 2.0 * hopping_ratio * g * wt * (1.0 - wt * wt) / (1.0 + wt * wt) ** 2
        return -np.column_stack([dlog, base])

    converged = False
    r = residual(x)
    for _ in range(max_iter):
        jac = jacobian(x)
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        lam = 1.0
        while lam > 1e-6:
            trial = x + lam * step
            rt = residual(trial)
            if rt @ rt <= r @ r:
                break
            lam *= 0.5
        else:
            trial, rt = x, r
        x, r_old, r = trial, r, rt
        trace.append(float(np.linalg.norm(r)))
        if np.all(np.abs(lam * step) <= 1e-13 * (1 + np.abs(x))) or abs(r_old @ r_old - r @ r) <= 1e-28:
            converged = True
            break

    tau, gamma = float(np.exp(x[0])), float(x[1])
    jac = jacobian(x)
    dof = max(tilt.size - 2, 1)
    try:
        cov = np.linalg.inv(jac.T @ jac) * (r @ r) / dof
        errs = {"tau": tau * float(np.sqrt(cov[0, 0])), "gamma": float(np.sqrt(cov[1, 1]))}
    except np.linalg.LinAlgError:
        errs = {"tau": float("nan"), "gamma": float("nan")}
    if not converged:
        flags.append("Gauss-Newton did not converge")
    if tau <= 0 or gamma <= 0:
        flags.append("non-positive parameter")
    return FitResult(
        kind="esaki-tsu",
        params={"tau": tau, "gamma": gamma},
        errors=errs,
        residual_norm=float(np.linalg.norm(r)),
        residual_rms=float(np.sqrt(np.mean(r * r))),
        window=(float(tilt[0]), float(tilt[-1])),
        ok=converged and tau > 0 and gamma > 0,
        flags=flags,
        trace=trace,
    )


def esaki_tsu_peak(tau, gamma, hopping_ratio, hopping_gn0):
    """(tilt, v_d/v0) at the maximum of the fitted curve: w tau = 1, v = gamma J~/J."""
    return 1.0 / (tau * hopping_gn0), gamma * hopping_ratio
