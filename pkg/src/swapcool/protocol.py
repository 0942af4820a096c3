"""Full-register simulation of the swap stages.

The register is laid out as C, C-bar, M_1, ..., M_L with C most significant
and each memory sector as large as C. A state of the full register is a flat
amplitude vector; internally it is viewed as a tensor with one axis for C,
one for C-bar and one per memory sector, so that a swap S_l is an axis
exchange and U acts on the leading two axes only.

The swapping stage is W = S_L U ... S_1 U. Its time-reversed partner uses
U^dag between swaps (W'), and the physical upload applies
W'^dag = U S_1 ... U S_L.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, NamedTuple

import numpy as np

from .channel import ChannelDiagnostics, QuantumChannel, diagnose, iterate, make_tau, make_tau_prime, require_ergodic
from .linalg import evolve_unitary, reduced_from_pure, trace_distance
from .network import SpinNetwork, build_heisenberg
from .tolerances import MAX_REGISTER_QUBITS, TOL

Direction = Literal["forward", "reverse"]


class RegisterCapError(ValueError):
    pass


class CFactorError(RuntimeError):
    pass


@dataclass(frozen=True)
class RegisterLayout:
    n_c: int
    n_cbar: int
    L: int

    @property
    def d_c(self) -> int:
        return 2**self.n_c

    @property
    def d_cbar(self) -> int:
        return 2**self.n_cbar

    @property
    def d_system(self) -> int:
        return self.d_c * self.d_cbar

    @property
    def d_memory(self) -> int:
        return self.d_c**self.L

    @property
    def n_total(self) -> int:
        return self.n_c + self.n_cbar + self.L * self.n_c

    @property
    def tensor_shape(self) -> tuple[int, ...]:
        return (self.d_c, self.d_cbar) + (self.d_c,) * self.L

    def check_cap(self, cap: int = MAX_REGISTER_QUBITS) -> None:
        if self.n_total > cap:
            raise RegisterCapError(
                f"full register needs {self.n_c} + {self.n_cbar} + {self.L}*{self.n_c} = "
                f"{self.n_total} qubits, above the cap of {cap}; lower L or the size of C"
            )


@dataclass(frozen=True, eq=False)
class ProtocolConfig:
    """Network, time step, number of swap rounds and controller reset state.

    ``t`` defaults to the network's suggested time step, else to the inverse
    of the largest coupling. ``zero_c`` defaults to all controlled spins down.
    """

    network: SpinNetwork
    L: int
    t: float | None = None
    zero_c: np.ndarray | None = None
    direction: Direction = "forward"
    register_cap: int = MAX_REGISTER_QUBITS

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be at least 1")
        if self.t is None and self.network.default_t is not None:
            object.__setattr__(self, "t", float(self.network.default_t))
        if self.t is None:
            mc = self.network.max_coupling
            object.__setattr__(self, "t", 1.0 / mc if mc > 0 else 1.0)
        if not self.t > 0:
            raise ValueError("time step must be positive")
        d_c = 2**self.network.n_controlled
        if self.zero_c is None:
            z = np.zeros(d_c, dtype=complex)
            z[0] = 1
        else:
            z = np.asarray(self.zero_c, dtype=complex).ravel()
            if z.shape != (d_c,) or abs(np.linalg.norm(z) - 1) > TOL.unitary:
                raise ValueError(f"controller state must be a normalised vector of length {d_c}")
        object.__setattr__(self, "zero_c", z)
        if self.direction not in ("forward", "reverse"):
            raise ValueError(f"unknown direction {self.direction!r}")

    def with_L(self, L: int) -> "ProtocolConfig":
        return ProtocolConfig(self.network, L, self.t, self.zero_c, self.direction, self.register_cap)

    def with_t(self, t: float) -> "ProtocolConfig":
        return ProtocolConfig(self.network, self.L, t, self.zero_c, self.direction, self.register_cap)

    @property
    def layout(self) -> RegisterLayout:
        return RegisterLayout(self.network.n_controlled, self.network.n_uncontrolled, self.L)

    @property
    def dims(self) -> tuple[int, int]:
        return self.layout.d_c, self.layout.d_cbar

    @cached_property
    def hamiltonian(self) -> np.ndarray:
        """Heisenberg Hamiltonian on C (x) C-bar (register order)."""
        return build_heisenberg(self.network, self.network.register_order)

    @cached_property
    def u(self) -> np.ndarray:
        return evolve_unitary(self.hamiltonian, self.t)

    @cached_property
    def tau(self) -> QuantumChannel:
        return make_tau(self.u, self.zero_c, self.dims)

    @cached_property
    def tau_prime(self) -> QuantumChannel:
        return make_tau_prime(self.u, self.zero_c, self.dims)

    @cached_property
    def diagnostics(self) -> ChannelDiagnostics:
        return diagnose(self.tau)

    @cached_property
    def diagnostics_prime(self) -> ChannelDiagnostics:
        return diagnose(self.tau_prime)

    def channel(self, direction: Direction | None = None) -> QuantumChannel:
        direction = direction or self.direction
        return self.tau if direction == "forward" else self.tau_prime

    def channel_diagnostics(self, direction: Direction | None = None) -> ChannelDiagnostics:
        direction = direction or self.direction
        return self.diagnostics if direction == "forward" else self.diagnostics_prime

    def zero_cbar(self, direction: Direction | None = None) -> np.ndarray:
        """Pure fixed point of the relevant channel; raises if there is none."""
        diag = require_ergodic(self.channel_diagnostics(direction), f"{direction or self.direction} channel")
        return diag.fixed_state

    def stage_unitary(self, direction: Direction | None = None) -> np.ndarray:
        direction = direction or self.direction
        return self.u if direction == "forward" else self.u.conj().T


# -- register primitives ------------------------------------------------------


def memory_vacuum(cfg: ProtocolConfig) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for _ in range(cfg.L):
        out = np.kron(out, cfg.zero_c)
    return out


def embed(psi: np.ndarray, cfg: ProtocolConfig) -> np.ndarray:
    """|psi>_{C C-bar} (x) |0>_M."""
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != cfg.layout.d_system:
        raise ValueError(f"system state has length {psi.size}, expected {cfg.layout.d_system}")
    cfg.layout.check_cap(cfg.register_cap)
    return np.kron(psi, memory_vacuum(cfg))


def apply_swap(state: np.ndarray, layout: RegisterLayout, ell: int) -> np.ndarray:
    """S_ell: exchange C with memory sector M_ell (1-based)."""
    if not 1 <= ell <= layout.L:
        raise IndexError(f"sector {ell} outside 1..{layout.L}")
    t = np.asarray(state).reshape(layout.tensor_shape)
    return np.ascontiguousarray(np.swapaxes(t, 0, 1 + ell)).reshape(-1)


def swap_gate(layout: RegisterLayout, ell: int) -> np.ndarray:
    """S_ell as an explicit permutation matrix (small registers only)."""
    layout.check_cap(14)
    dim = int(np.prod(layout.tensor_shape))
    cols = np.arange(dim)
    rows = np.array([np.argmax(apply_swap(np.eye(1, dim, c).ravel(), layout, ell)) for c in cols])
    s = np.zeros((dim, dim), dtype=complex)
    s[rows, cols] = 1
    return s


def apply_system_unitary(state: np.ndarray, u: np.ndarray, layout: RegisterLayout) -> np.ndarray:
    m = np.asarray(state).reshape(layout.d_system, -1)
    return (u @ m).reshape(-1)


def _forward_stage(state: np.ndarray, u: np.ndarray, layout: RegisterLayout) -> np.ndarray:
    # S_L U ... S_1 U
    for ell in range(1, layout.L + 1):
        state = apply_swap(apply_system_unitary(state, u, layout), layout, ell)
    return state


def _adjoint_stage(state: np.ndarray, u: np.ndarray, layout: RegisterLayout) -> np.ndarray:
    # u S_1 ... u S_L
    for ell in range(layout.L, 0, -1):
        state = apply_system_unitary(apply_swap(state, layout, ell), u, layout)
    return state


def apply_W(psi: np.ndarray, cfg: ProtocolConfig) -> np.ndarray:
    """W (|psi> (x) |0>_M) as a full-register vector."""
    return _forward_stage(embed(psi, cfg), cfg.u, cfg.layout)


def apply_W_dagger(state: np.ndarray, cfg: ProtocolConfig) -> np.ndarray:
    cfg.layout.check_cap(cfg.register_cap)
    return _adjoint_stage(state, cfg.u.conj().T, cfg.layout)


def apply_W_prime(psi: np.ndarray, cfg: ProtocolConfig) -> np.ndarray:
    """W' (|psi> (x) |0>_M), with U^dag between the swaps."""
    return _forward_stage(embed(psi, cfg), cfg.u.conj().T, cfg.layout)


def apply_W_prime_dagger(state: np.ndarray, cfg: ProtocolConfig) -> np.ndarray:
    """W'^dag = U S_1 ... U S_L on a full-register vector."""
    cfg.layout.check_cap(cfg.register_cap)
    return _adjoint_stage(state, cfg.u, cfg.layout)


def swap_stage(psi: np.ndarray, cfg: ProtocolConfig, direction: Direction | None = None) -> np.ndarray:
    direction = direction or cfg.direction
    return apply_W(psi, cfg) if direction == "forward" else apply_W_prime(psi, cfg)


def excitation_total(state: np.ndarray, layout: RegisterLayout) -> float:
    """Expected number of |1> qubits over the whole register."""
    p = np.abs(np.asarray(state)) ** 2
    n = layout.n_total
    counts = np.zeros(p.size)
    idx = np.arange(p.size)
    for b in range(n):
        counts += (idx >> b) & 1
    return float(p @ counts)


# -- reduced dynamics ---------------------------------------------------------


def rho_prime(psi: np.ndarray, u: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Tr_C[U rho U^dag] for a pure state vector or a density matrix on C (x) C-bar."""
    d_c, d_cbar = dims
    x = np.asarray(psi, dtype=complex)
    if x.ndim == 1:
        if x.size != d_c * d_cbar:
            raise ValueError(f"state has length {x.size}, expected {d_c * d_cbar}")
        return reduced_from_pure(u @ x, [d_c, d_cbar], [1])
    if x.shape != (d_c * d_cbar, d_c * d_cbar):
        raise ValueError(f"state has shape {x.shape}, expected {d_c * d_cbar} square")
    r = (u @ x @ u.conj().T).reshape(d_c, d_cbar, d_c, d_cbar)
    return np.einsum("iaib->ab", r)


def reduced_cbar(state: np.ndarray, layout: RegisterLayout) -> np.ndarray:
    """Tr_{C M} of a full-register pure state."""
    t = np.asarray(state).reshape(layout.d_c, layout.d_cbar, -1)
    m = np.moveaxis(t, 1, 0).reshape(layout.d_cbar, -1)
    return m @ m.conj().T


def reduced_memory(state: np.ndarray, layout: RegisterLayout) -> np.ndarray:
    """Tr_{C C-bar} of a full-register pure state (d_M x d_M, small registers)."""
    m = np.asarray(state).reshape(layout.d_system, -1)
    return m.T @ m.conj()


def reduced_system(state: np.ndarray, layout: RegisterLayout) -> np.ndarray:
    """Tr_M of a full-register pure state."""
    m = np.asarray(state).reshape(layout.d_system, -1)
    return m @ m.conj().T


class ReducedDynamicsCheck(NamedTuple):
    lhs: np.ndarray
    rhs: np.ndarray
    distance: float


def reduced_dynamics_check(psi: np.ndarray, cfg: ProtocolConfig) -> ReducedDynamicsCheck:
    """Compare Tr_{CM}[W(...)W^dag] with tau^(L-1)(rho') by trace distance."""
    lhs = reduced_cbar(apply_W(psi, cfg), cfg.layout)
    rhs = iterate(cfg.tau, rho_prime(psi, cfg.u, cfg.dims), cfg.L - 1)
    return ReducedDynamicsCheck(lhs, rhs, trace_distance(lhs, rhs))


# -- decompositions -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    """post-swap state = |0>_C (x) [sqrt(eta)|0>|phi> + sqrt(1 - eta)|Delta>].

    ``phi`` keeps the phase inherited from the dynamics (the coefficient of
    |0>|phi> is real and positive); no extra rephasing is applied, because the
    code vectors of different inputs must stay linearly consistent.
    """

    eta: float
    one_minus_eta: float
    phi: np.ndarray | None
    delta: np.ndarray | None  # flattened C-bar (x) M
    zero_cbar: np.ndarray
    c_defect: float
    block: np.ndarray = field(repr=False)  # C-bar x M amplitudes after stripping C

    def reconstruct(self) -> np.ndarray:
        d_cbar, d_m = self.block.shape
        out = np.zeros(d_cbar * d_m, dtype=complex)
        if self.phi is not None:
            out += np.sqrt(self.eta) * np.kron(self.zero_cbar, self.phi)
        if self.delta is not None:
            out += np.sqrt(self.one_minus_eta) * self.delta
        return out

    def delta_overlap(self) -> np.ndarray:
        """<0|_C-bar Delta>, a vector on M."""
        if self.delta is None:
            return np.zeros(self.block.shape[1], dtype=complex)
        return self.zero_cbar.conj() @ self.delta.reshape(self.block.shape)


def decompose_after_W(
    full_state: np.ndarray, cfg: ProtocolConfig, direction: Direction | None = None, zero_cbar: np.ndarray | None = None
) -> DecompositionResult:
    """Split a post-swap-stage state into its fixed-point and orthogonal parts."""
    lay = cfg.layout
    if zero_cbar is None:
        zero_cbar = cfg.zero_cbar(direction)
    zero_cbar = np.asarray(zero_cbar, dtype=complex).ravel()
    t = np.asarray(full_state).reshape(lay.d_c, lay.d_cbar * lay.d_memory)
    on_zero = cfg.zero_c.conj() @ t
    off = t - np.outer(cfg.zero_c, on_zero)
    c_defect = float(np.linalg.norm(off))
    if c_defect > TOL.c_factor:
        raise CFactorError(f"C factor deviates from the controller state by {c_defect:.3e}")
    x = on_zero.reshape(lay.d_cbar, lay.d_memory)
    a = zero_cbar.conj() @ x
    resid = x - np.outer(zero_cbar, a)
    eta = float(np.real(np.vdot(a, a)))
    ome = float(np.real(np.vdot(resid, resid)))
    phi = a / np.sqrt(eta) if eta > TOL.eta_floor else None
    rn = np.sqrt(ome)
    delta = (resid / rn).reshape(-1) if rn > 1e-12 else None
    return DecompositionResult(eta, ome, phi, delta, zero_cbar, c_defect, x)


def eta_tilde(psi: np.ndarray, phi: np.ndarray, cfg: ProtocolConfig, zero_cbar: np.ndarray | None = None) -> tuple[float, complex]:
    """(eta~, amplitude) from W^dag (|0>_C |0>_C-bar |phi>_M) projected on |psi>|0>_M."""
    if zero_cbar is None:
        zero_cbar = cfg.zero_cbar("forward")
    start = np.kron(np.kron(cfg.zero_c, zero_cbar), phi)
    back = apply_W_dagger(start, cfg)
    amp = complex(np.vdot(embed(psi, cfg), back))
    return float(abs(amp) ** 2), amp
