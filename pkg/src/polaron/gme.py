"""Phonon memory kernel and the generalized master equation on a 1D lattice.

Times are in hbar/J and rates in J/hbar unless a name says otherwise.  The
kernel exponent is evaluated on the phonon grid, whose natural time unit is
hbar/gn0; the conversion is s[hbar/gn0] = s[hbar/J] / (J/gn0).

Sign convention: the tilt term hbar*omega_B*j raises the energy of site j,
so W_minus (emission resonant) carries the downhill hop j+1 -> j and
W_plus the uphill hop j -> j+1.  Drift is toward negative j.
"""
from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

from .bogoliubov import build_phonon_grid
from .coupling import SystemConstants, angular_average, hopping_exponent
from .errors import ConvergenceError, ParameterError, SolverInvariantError

BASE_DT = 0.02
DEFAULT_SITES = 121
MAX_SITES = 2001
NORM_TOL = 1e-8
NORM_ABORT = 1e-6
BOUNDARY_TOL = 1e-6
PHI_TOL = 5e-3
ETAS = (4e-2, 2e-2, 1e-2)


def default_dt(tilt=0.0, base=BASE_DT):
    """Largest base/2^k with dt * tilt <= 0.1 (ten steps per Bloch radian)."""
    dt = base
    while abs(tilt) * dt > 0.1:
        dt /= 2
    return dt


def phonon_grid_for(constants: SystemConstants, temperature_over_ep, s_max_gn0, refine=1, tol=1e-8):
    return build_phonon_grid(
        constants.scales, constants.sigma_over_xi, constants.params.kappa_over_g,
        constants.temperature_gn0(temperature_over_ep), tol=tol,
        dimension=constants.dimension, s_max=s_max_gn0, refine=refine,
    )


def phi_exponent(s, grid, a_over_xi, block=64, group=32):
    """Complex exponent Phi(s) for times ``s`` in hbar/gn0.

    Phi = sum_q 2|M|^2 [1 - cos(q.a)] [(N+1)(1 - e^{i w s}) + N(1 - e^{-i w s})]
        = sum_q 2|M|^2 [1 - cos(q.a)] [(2N+1)(1 - cos w s) - i sin w s].

    Uniformly spaced ``s`` are split into blocks t0 + k ds; the addition
    theorems turn every block into products with one fixed table of
    cos(w k ds), sin(w k ds), evaluated as matrix products over many blocks.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    g = 2.0 * grid.weights * grid.coupling * (1.0 - angular_average(grid.dimension, grid.nodes * a_over_xi))
    gt = g * (2 * grid.occupation + 1)
    total = gt.sum()

    def direct(x):
        # 1 - cos = 2 sin^2 keeps small s free of cancellation
        ws = np.outer(x, grid.omega)
        half = np.sin(0.5 * ws)
        return 2.0 * (half * half) @ gt - 1j * (np.sin(ws) @ g)

    uniform = s.size > block and np.allclose(np.diff(s), s[1] - s[0], rtol=1e-9, atol=0)
    if not uniform:
        out = np.empty(s.size, dtype=complex)
        for i in range(0, s.size, block):
            out[i:i + block] = direct(s[i:i + block])
        return out
    ds = s[1] - s[0]
    steps = np.outer(ds * np.arange(block), grid.omega)
    cos_k, sin_k = np.cos(steps), np.sin(steps)
    starts = s[0] + ds * block * np.arange(-(-s.size // block))
    re = np.empty((starts.size, block))
    im = np.empty((starts.size, block))
    for i in range(0, starts.size, group):
        ph = np.outer(starts[i:i + group], grid.omega)
        c0, s0 = np.cos(ph), np.sin(ph)
        n = c0.shape[0]
        v = np.concatenate([c0 * gt, s0 * gt, s0 * g, c0 * g]).T
        a = cos_k @ v
        b = sin_k @ v
        # sum gt cos(w (t0 + k ds)) and sum g sin(w (t0 + k ds)) for each block origin t0
        re[i:i + n] = (a[:, :n] - b[:, n:2 * n]).T
        im[i:i + n] = (a[:, 2 * n:3 * n] + b[:, 3 * n:]).T
    out = (total - re.ravel() - 1j * im.ravel())[:s.size]
    out[:block] = direct(s[:block])
    return out


def phi_asymptote(grid, a_over_xi):
    """Real limit of Phi(s) for s -> infinity: twice the band-narrowing exponent."""
    return 2.0 * hopping_exponent(grid, a_over_xi)


def memory_function(phi, s, tilt):
    """(W_plus, W_minus) = 2 Re[e^{-Phi} e^{+-i omega_B s}] in (J/hbar)^2, s in hbar/J."""
    base = np.exp(-np.asarray(phi))
    rot = np.exp(1j * tilt * np.asarray(s))
    return 2.0 * np.real(base * rot), 2.0 * np.real(base * np.conj(rot))


def check_phi_convergence(constants, temperature_over_ep, s_gn0, tol=PHI_TOL):
    """Max relative change of |Phi| on doubling the grid; raises above ``tol``."""
    s_max = float(np.max(s_gn0))
    coarse = phonon_grid_for(constants, temperature_over_ep, s_max)
    fine = phonon_grid_for(constants, temperature_over_ep, s_max, refine=2)
    a = phi_exponent(s_gn0, coarse, constants.a_over_xi)
    b = phi_exponent(s_gn0, fine, constants.a_over_xi)
    # floor the scale so rounding noise near s = 0 does not count as a change
    scale = np.maximum(np.abs(b), 1e-6 * np.max(np.abs(b)))
    change = float(np.max(np.abs(np.abs(a) - np.abs(b)) / scale))
    if change > tol:
        raise ConvergenceError(f"Phi changed by {change:.3g} on grid doubling (limit {tol:g})")
    return change


@dataclass(frozen=True)
class MemoryKernel:
    s: np.ndarray             # hbar/J
    phi: np.ndarray
    w_plus: np.ndarray        # (J/hbar)^2
    w_minus: np.ndarray
    w_inf: float              # 2 (J~/J)^2, the tilt-free asymptote
    tilt: float               # hbar omega_B / J
    temperature: float        # k_B T / E_p
    hopping_ratio: float      # J~/J
    decay_time: float | None  # hbar/J, tilt-free kernels only
    hopping_gn0: float
    info: dict = field(default_factory=dict, compare=False)

    @property
    def dt(self):
        return float(self.s[1] - self.s[0])

    @property
    def phi_inf(self):
        return -2.0 * np.log(self.hopping_ratio)

    @property
    def hash(self):
        h = hashlib.sha256()
        for arr in (self.s, self.w_plus, self.w_minus):
            h.update(np.ascontiguousarray(arr, dtype=float).tobytes())
        return h.hexdigest()[:16]


def _decay_time(s, w, w_inf, frac=0.01):
    dev = np.abs(w - w_inf) >= frac * w[0]
    if not dev.any():
        return 0.0
    last = np.nonzero(dev)[0][-1]
    if last == s.size - 1:
        return None
    return float(s[last + 1])


def build_kernel(constants: SystemConstants, temperature_over_ep, tilt, t_final, dt=None, grid=None):
    """Sample W_plus, W_minus on s = 0, dt, ..., t_final (hbar/J)."""
    if t_final <= 0:
        raise ParameterError("t_final must be positive")
    if dt is None:
        dt = default_dt(tilt)
    if dt <= 0:
        raise ParameterError("dt must be positive")
    jg = constants.hopping
    if jg <= 0:
        raise ParameterError("bare hopping must be positive for transport")
    n = int(round(t_final / dt))
    s = dt * np.arange(n + 1)
    s_gn0 = s / jg
    if grid is None:
        grid = phonon_grid_for(constants, temperature_over_ep, s_gn0[-1])
    phi = phi_exponent(s_gn0, grid, constants.a_over_xi)
    phi[0] = 0.0
    wp, wm = memory_function(phi, s, tilt)
    phi_inf = phi_asymptote(grid, constants.a_over_xi)
    w_inf = 2.0 * np.exp(-phi_inf)
    decay = _decay_time(s, wp, w_inf) if tilt == 0 else None
    return MemoryKernel(
        s=s, phi=phi, w_plus=wp, w_minus=wm, w_inf=w_inf, tilt=float(tilt),
        temperature=float(temperature_over_ep), hopping_ratio=float(np.exp(-0.5 * phi_inf)),
        decay_time=decay, hopping_gn0=jg,
        info={"grid_nodes": grid.size, "grid_convergence": grid.info.get("convergence")},
    )


def constant_kernel(t_final, dt=BASE_DT, tilt=0.0):
    """Kernel of the uncoupled chain: W = 2 cos(omega_B s)."""
    n = int(round(t_final / dt))
    s = dt * np.arange(n + 1)
    wp, wm = memory_function(np.zeros_like(s), s, tilt)
    return MemoryKernel(s=s, phi=np.zeros_like(s, dtype=complex), w_plus=wp, w_minus=wm,
                        w_inf=2.0, tilt=float(tilt), temperature=0.0, hopping_ratio=1.0,
                        decay_time=None, hopping_gn0=float("nan"))


def single_mode_kernel_oracle(x, z, wt, n_trunc=60, tol=1e-12):
    """Thermal trace of one displaced mode: brute-force Fock sum and closed form.

    Returns (brute, closed) for sum_{n,m} z^n |<m|D(beta)|n>|^2 e^{i wt (m-n)},
    x = |beta|^2.  The closed form is Z exp[-x{(N+1)(1-e^{i wt}) + N(1-e^{-i wt})}].
    """
    if not 0 <= z < 1:
        raise ValueError("need 0 <= z < 1")
    if x < 0 or n_trunc < 1:
        raise ValueError("need x >= 0 and n_trunc >= 1")
    if z ** n_trunc / (1 - z) > tol:
        warnings.warn(f"Fock truncation tail {z ** n_trunc / (1 - z):.2e} exceeds {tol:g}", stacklevel=2)
    occ = z / (1 - z)
    closed = np.exp(-x * ((occ + 1) * (1 - np.exp(1j * wt)) + occ * (1 - np.exp(-1j * wt)))) / (1 - z)
    idx = np.arange(n_trunc)
    n, m = np.meshgrid(idx, idx, indexing="ij")
    lo, hi = np.minimum(n, m), np.maximum(n, m)
    if x == 0:
        prob = (n == m).astype(float)
    else:
        lag = eval_genlaguerre(lo, hi - lo, x)
        prob = np.exp(gammaln(lo + 1) - gammaln(hi + 1) + (hi - lo) * np.log(x) - x) * lag**2
    brute = np.sum(z**n * prob * np.exp(1j * wt * (m - n)))
    return complex(brute), complex(closed)


@dataclass
class Trajectory:
    sites: np.ndarray          # j
    t: np.ndarray              # hbar/J
    P: np.ndarray              # (times, sites)
    dt: float
    scheme: str
    kernel_hash: str = ""
    norm_drift: float = 0.0
    min_value: float = 0.0
    boundary: float = 0.0

    @property
    def n_sites(self):
        return self.sites.size

    @property
    def valid(self):
        return self.boundary < BOUNDARY_TOL and self.norm_drift < NORM_TOL

    def at(self, t):
        i = int(np.argmin(np.abs(self.t - t)))
        return self.P[i]

    def reported(self):
        """Occupations with tiny negative quadrature excursions clipped (for output only)."""
        return np.clip(self.P, 0.0, None)


def _hop(flow_down, flow_up):
    """dP/dt from site-resolved flows: ``flow_down[j]`` leaves j downhill, ``flow_up[j]`` uphill."""
    r = np.zeros_like(flow_down)
    r[..., :-1] += flow_down[..., 1:] - flow_up[..., :-1]
    r[..., 1:] += flow_up[..., :-1] - flow_down[..., 1:]
    return r


def _generator(n_sites, down, up):
    return np.array([_hop(down * e, up * e) for e in np.eye(n_sites)]).T


def _finish(traj, enforce):
    traj.norm_drift = float(np.max(np.abs(traj.P.sum(axis=1) - 1.0)))
    traj.min_value = float(traj.P.min())
    traj.boundary = float(max(abs(traj.P[-1, 0]), abs(traj.P[-1, -1])))
    if not enforce:
        return traj
    if traj.norm_drift > NORM_ABORT:
        raise SolverInvariantError(f"normalization drift {traj.norm_drift:.3g}")
    if traj.boundary >= BOUNDARY_TOL:
        raise SolverInvariantError(
            f"boundary occupation {traj.boundary:.3g} >= {BOUNDARY_TOL:g} on {traj.n_sites} sites; enlarge the lattice"
        )
    return traj


def _gme_steps(kernel, n_sites, n_steps):
    L = n_sites
    dt = kernel.dt
    wm, wp = kernel.w_minus, kernel.w_plus
    Y = np.zeros((n_steps + 1, L))
    Y[0, (L - 1) // 2] = 1.0
    k0 = _generator(L, wm[0], wp[0])
    # the current-step trapezoid term is implicit: (I - dt^2/4 K0) y = rhs
    step = np.linalg.inv(np.eye(L) - 0.25 * dt * dt * k0)
    F = np.zeros(L)
    both = np.stack([wm, wp])
    for n in range(n_steps):
        # history part of F_{n+1}: trapezoid over lags n+1..1 (the m = 0 endpoint is halved)
        lags = both[:, n + 1:0:-1].copy()
        lags[:, 0] *= 0.5
        down, up = lags @ Y[:n + 1]
        hist = dt * _hop(down, up)
        y = step @ (Y[n] + 0.5 * dt * (F + hist))
        Y[n + 1] = y
        F = hist + 0.5 * dt * _hop(wm[0] * y, wp[0] * y)
    return Y


def solve_gme(kernel: MemoryKernel, n_sites=None, t_final=None, enforce=True):
    """Integrate dP/dt = int_0^t ds W(s) [hops](t - s) from P_j(0) = delta_j0.

    Product-trapezoidal convolution with the instantaneous term treated
    implicitly, so probability is conserved to round-off.  With
    ``n_sites=None`` the lattice starts at 121 sites and grows until the
    boundary occupation stays below 1e-6.
    """
    if t_final is None:
        t_final = kernel.s[-1]
    n_steps = int(round(t_final / kernel.dt))
    if n_steps > kernel.s.size - 1:
        raise ParameterError("kernel shorter than t_final")
    auto = n_sites is None
    L = DEFAULT_SITES if auto else int(n_sites)
    if L < 3 or L % 2 == 0:
        raise ParameterError("n_sites must be odd and >= 3")
    while True:
        Y = _gme_steps(kernel, L, n_steps)
        traj = Trajectory(sites=np.arange(L) - (L - 1) // 2, t=kernel.s[:n_steps + 1].copy(), P=Y,
                          dt=kernel.dt, scheme="gme-trapezoid-implicit", kernel_hash=kernel.hash)
        try:
            return _finish(traj, enforce)
        except SolverInvariantError:
            if not auto or traj.boundary < BOUNDARY_TOL or 2 * L - 1 > MAX_SITES:
                raise
            L = 2 * L - 1


HALVING_TOL = 1e-5
MIN_DT = 1e-4


def solve_gme_converged(constants: SystemConstants, temperature_over_ep, tilt, t_final,
                        dt=None, n_sites=None, tol=HALVING_TOL, min_dt=MIN_DT):
    """GME run whose final occupations are stable under step halving.

    Starts from ``dt`` (default :func:`default_dt`) and halves until the
    change of every P_j(t_final) between successive steps is below ``tol``.
    Returns the finest kernel and trajectory plus the halving record.
    """
    if dt is None:
        dt = default_dt(tilt)
    grid = phonon_grid_for(constants, temperature_over_ep, t_final / constants.hopping)
    kernel = build_kernel(constants, temperature_over_ep, tilt, t_final, dt=dt, grid=grid)
    traj = solve_gme(kernel, n_sites=n_sites)
    history = []
    while True:
        dt /= 2
        if dt < min_dt:
            raise ConvergenceError(f"step halving not converged to {tol:g} above dt = {min_dt:g} ({history})")
        fine_kernel = build_kernel(constants, temperature_over_ep, tilt, t_final, dt=dt, grid=grid)
        fine = solve_gme(fine_kernel, n_sites=traj.n_sites if n_sites is None else n_sites)
        change = float(np.max(np.abs(fine.P[-1] - traj.P[-1])))
        history.append((2 * dt, dt, change))
        kernel, traj = fine_kernel, fine
        if change < tol:
            break
    return kernel, traj, {"halving": history, "halving_change": history[-1][2], "dt": dt}


def pauli_rates(kernel: MemoryKernel, tail_tol=1e-4):
    """Markov rates (w_plus, w_minus) in J/hbar from the kernel.

    Tilt-free: w = int_0^inf [W(s) - W_inf] ds.  With tilt the oscillating
    asymptote is integrated under a window e^{-eta s}, extrapolated to eta -> 0.
    """
    s = kernel.s
    if kernel.tilt == 0 and kernel.temperature == 0 and kernel.phi_inf > 0:
        raise ParameterError("Markov limit undefined at T = 0 without tilt: the kernel does not decay")
    base = 2.0 * (np.exp(-kernel.phi) - np.exp(-kernel.phi_inf))
    if np.abs(base[-1]) >= tail_tol * 2.0:
        raise ConvergenceError(
            f"kernel tail |W - W_inf| = {abs(base[-1]):.2e} at s = {s[-1]:g}; extend the kernel"
        )
    from scipy.integrate import simpson

    rates = []
    for sign in (1, -1):
        rot = np.exp(sign * 1j * kernel.tilt * s)
        if kernel.tilt == 0:
            rates.append(float(simpson(np.real(base), x=s)))
            continue
        ests = []
        for eta in ETAS:
            win = np.exp(-eta * s)
            decaying = simpson(np.real(base * rot) * win, x=s)
            const = 2.0 * np.exp(-kernel.phi_inf) * eta / (eta**2 + kernel.tilt**2)
            ests.append(decaying + const)
        # Richardson in eta (halving): two levels of linear extrapolation
        r1 = [2 * ests[1] - ests[0], 2 * ests[2] - ests[1]]
        rates.append(float((4 * r1[1] - r1[0]) / 3))
    return rates[0], rates[1]


def solve_pauli(w_plus, w_minus, n_sites=DEFAULT_SITES, t=None, t_final=10.0, dt=0.1, enforce=True):
    """Nearest-neighbour classical master equation via the matrix exponential."""
    if w_plus < 0 or w_minus < 0 or not np.isfinite(w_plus + w_minus):
        raise ParameterError("rates must be finite and non-negative")
    if n_sites < 3 or n_sites % 2 == 0:
        raise ParameterError("n_sites must be odd and >= 3")
    if t is None:
        t = dt * np.arange(int(round(t_final / dt)) + 1)
    t = np.asarray(t, dtype=float)
    gen = _generator(n_sites, w_minus, w_plus)
    p0 = np.zeros(n_sites)
    p0[(n_sites - 1) // 2] = 1.0
    P = np.array([expm(gen * ti) @ p0 for ti in t])
    traj = Trajectory(sites=np.arange(n_sites) - (n_sites - 1) // 2, t=t, P=P,
                      dt=float(t[1] - t[0]) if t.size > 1 else 0.0, scheme="pauli-expm")
    return _finish(traj, enforce)
