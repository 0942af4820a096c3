"""Cooling efficiency: vacuum probability, mean excitation number and the
random-shuffle estimate, all obtained by iterating the one-round channel.

After each round C holds the controller reset state, so the system state is
|0><0|_C (x) tau^(L-1)(rho') and only C-bar needs to be tracked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .channel import orbit, require_ergodic
from .network import excitation_counts
from .protocol import ProtocolConfig, rho_prime


@dataclass(frozen=True, eq=False)
class CoolingTrace:
    L_values: np.ndarray
    p0: np.ndarray
    one_minus_p0: np.ndarray
    avg_n: np.ndarray
    eta: np.ndarray
    estimator: np.ndarray
    initial_state_label: str = ""

    def rows(self):
        for i, L in enumerate(self.L_values):
            yield int(L), self.p0[i], self.avg_n[i], self.eta[i], self.estimator[i]


def _as_density(rho0: np.ndarray) -> np.ndarray:
    x = np.asarray(rho0, dtype=complex)
    return np.outer(x, x.conj()) if x.ndim == 1 else x


def _cbar_orbit(rho0, cfg: ProtocolConfig, Lmax: int) -> list[np.ndarray]:
    """[tau^(L-1)(rho') for L = 1..Lmax]."""
    if Lmax < 1:
        return []
    return orbit(cfg.tau, rho_prime(rho0, cfg.u, cfg.dims), Lmax - 1)


def _p0_and_n(rho0, cfg: ProtocolConfig, Lmax: int, sigmas=None):
    lay = cfg.layout
    rho = _as_density(rho0)
    n_sys = excitation_counts(lay.n_c + lay.n_cbar)
    n_cbar = excitation_counts(lay.n_cbar)
    c_pop = np.abs(cfg.zero_c) ** 2
    c_vac = float(c_pop[0])
    c_exc = float(c_pop @ excitation_counts(lay.n_c))
    diag0 = np.real(np.diag(rho))
    p0 = [diag0[0]]
    ome = [float(diag0[1:].sum())]
    avg = [float(diag0 @ n_sys)]
    if sigmas is None:
        sigmas = _cbar_orbit(rho0, cfg, Lmax)
    for s in sigmas:
        d = np.real(np.diag(s))
        p0.append(c_vac * d[0])
        # vacuum controller: the complement sum is exact; otherwise subtract
        ome.append(float(d[1:].sum()) if c_vac == 1.0 else 1.0 - c_vac * d[0])
        avg.append(c_exc + float(d @ n_cbar))
    return np.array(p0), np.array(ome), np.array(avg)


def p0_sequence(rho0, cfg: ProtocolConfig, Lmax: int, certify: bool = True) -> np.ndarray:
    """P0 for L = 0..Lmax (entry L is the vacuum probability after L rounds)."""
    if certify:
        require_ergodic(cfg.diagnostics, "cooling channel")
    return _p0_and_n(rho0, cfg, Lmax)[0]


def avg_excitations(rho0, cfg: ProtocolConfig, Lmax: int, certify: bool = True) -> np.ndarray:
    """<N> on C (x) C-bar for L = 0..Lmax."""
    if certify:
        require_ergodic(cfg.diagnostics, "cooling channel")
    return _p0_and_n(rho0, cfg, Lmax)[2]


def shuffle_estimate(n0: float, size_c: int, size_cbar: int, L) -> np.ndarray | float:
    """<N>^(0) (1 / (1 + |C|/|C-bar|))^L."""
    if size_c < 1 or size_cbar < 1:
        raise ValueError("both regions need at least one site")
    return n0 * (1.0 / (1.0 + size_c / size_cbar)) ** np.asarray(L, dtype=float)


def cooling_trace(rho0, cfg: ProtocolConfig, Lmax: int, label: str = "") -> CoolingTrace:
    diag = require_ergodic(cfg.diagnostics, "cooling channel")
    sigmas = _cbar_orbit(rho0, cfg, Lmax)
    p0, ome, avg = _p0_and_n(rho0, cfg, Lmax, sigmas)
    z = diag.fixed_state
    lay = cfg.layout
    rho = _as_density(rho0).reshape(lay.d_c, lay.d_cbar, lay.d_c, lay.d_cbar)
    eta = [float(np.real(z.conj() @ np.einsum("iaib->ab", rho) @ z))]
    eta += [float(np.real(z.conj() @ s @ z)) for s in sigmas]
    L = np.arange(Lmax + 1)
    net = cfg.network
    est = shuffle_estimate(avg[0], net.n_controlled, net.n_uncontrolled, L)
    return CoolingTrace(L, p0, ome, avg, np.array(eta), est, label)


def relative_rms(exact: Sequence[float], approx: Sequence[float]) -> float:
    """RMS(exact - approx) / RMS(exact)."""
    e = np.asarray(exact, dtype=float)
    a = np.asarray(approx, dtype=float)
    return float(np.sqrt(np.mean((e - a) ** 2)) / np.sqrt(np.mean(e**2)))


class TimeFit(NamedTuple):
    t_best: float
    deviation: float  # summed squared deviation at t_best
    relative_rms: float
    exact: np.ndarray
    estimate: np.ndarray


def select_time_step(candidates: Iterable[tuple[float, np.ndarray]], size_c: int, size_cbar: int) -> TimeFit:
    """Pick the (t, exact <N> curve) pair closest to the shuffle estimate.

    Candidates are visited in increasing t and only a strictly smaller
    deviation replaces the incumbent, so ties go to the smaller t.
    """
    best = None
    for t, exact in sorted(candidates, key=lambda c: c[0]):
        exact = np.asarray(exact, dtype=float)
        est = shuffle_estimate(exact[0], size_c, size_cbar, np.arange(exact.size))
        dev = float(np.sum((exact - est) ** 2))
        if best is None or dev < best.deviation:
            best = TimeFit(float(t), dev, relative_rms(exact, est), exact, est)
    if best is None:
        raise ValueError("no candidate time steps")
    return best


def fit_time_step(rho0, cfg_template: ProtocolConfig, Lmax: int, t_grid: Sequence[float]) -> TimeFit:
    """Grid-search the time step whose exact <N> curve best matches the shuffle estimate.

    Ties go to the smaller t. Ergodicity is not certified per grid point.
    """
    grid = sorted(float(t) for t in t_grid)
    if not grid:
        raise ValueError("t_grid is empty")
    net = cfg_template.network
    curves = ((t, avg_excitations(rho0, cfg_template.with_t(t), Lmax, certify=False)) for t in grid)
    return select_time_step(curves, net.n_controlled, net.n_uncontrolled)


def decay_factor(values: Sequence[float]) -> float:
    """Geometric-mean per-step ratio values[-1] / values[0] over the sequence."""
    v = np.asarray(values, dtype=float)
    return float((v[-1] / v[0]) ** (1.0 / (v.size - 1)))
