"""The one-round channels on the uncontrolled region and their spectra.

A channel is stored both as Kraus operators (cheap iteration) and as a
superoperator matrix (spectrum). Vectorisation is column stacking,
``vec(rho) = rho.reshape(-1, order="F")``, so that
``vec(K rho K^dag) = (conj(K) (x) K) vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .linalg import is_unitary, purity
from .tolerances import MAX_CBAR_QUBITS, TOL


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d, order="F")


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    kraus: tuple[np.ndarray, ...]
    superop: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        kraus = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not kraus:
            raise ValueError("a channel needs at least one Kraus operator")
        d = kraus[0].shape[0]
        if any(k.shape != (d, d) for k in kraus):
            raise ValueError("Kraus operators must all be square of the same size")
        if d > 2**MAX_CBAR_QUBITS:
            raise ValueError(f"channel dimension {d} exceeds the cap 2**{MAX_CBAR_QUBITS}")
        object.__setattr__(self, "kraus", kraus)
        object.__setattr__(self, "superop", sum(np.kron(k.conj(), k) for k in kraus))

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho)
        if rho.shape != (self.dim, self.dim):
            raise ValueError(f"state has shape {rho.shape}, channel acts on dimension {self.dim}")
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def completeness_defect(self) -> float:
        s = sum(k.conj().T @ k for k in self.kraus)
        return float(np.linalg.norm(s - np.eye(self.dim)))

    def choi(self) -> np.ndarray:
        """Choi matrix sum_ij |i><j| (x) T(|i><j|), built from the superoperator."""
        d = self.dim
        # superop[(a, b), (i, j)] in column-stacked indices: row a + d*b, col i + d*j
        s = self.superop.reshape(d, d, d, d)  # [b, a, j, i]
        return np.transpose(s, (3, 1, 2, 0)).reshape(d * d, d * d)


def _kraus_from_unitary(u: np.ndarray, zero_c: np.ndarray, dims: tuple[int, int]) -> list[np.ndarray]:
    d_c, d_cbar = dims
    u = np.asarray(u, dtype=complex)
    if u.shape != (d_c * d_cbar, d_c * d_cbar):
        raise ValueError(f"unitary has shape {u.shape}, expected {d_c * d_cbar} square")
    if not is_unitary(u):
        raise ValueError("evolution operator is not unitary")
    zero_c = np.asarray(zero_c, dtype=complex).ravel()
    if zero_c.shape != (d_c,):
        raise ValueError(f"controller state has length {zero_c.size}, expected {d_c}")
    if abs(np.linalg.norm(zero_c) - 1) > TOL.unitary:
        raise ValueError("controller state is not normalised")
    u4 = u.reshape(d_c, d_cbar, d_c, d_cbar)
    return [np.einsum("xay,a->xy", u4[i], zero_c) for i in range(d_c)]


def make_tau(u: np.ndarray, zero_c: np.ndarray, dims: tuple[int, int]) -> QuantumChannel:
    """tau(rho) = Tr_C[U (|0><0|_C (x) rho) U^dag] with C the leading factor of ``u``."""
    return QuantumChannel(tuple(_kraus_from_unitary(u, zero_c, dims)))


def make_tau_prime(u: np.ndarray, zero_c: np.ndarray, dims: tuple[int, int]) -> QuantumChannel:
    """The same construction with U replaced by U^dag."""
    return make_tau(np.asarray(u).conj().T, zero_c, dims)


@dataclass(frozen=True, eq=False)
class ChannelDiagnostics:
    eigenvalues: np.ndarray  # descending modulus
    kappa: float
    ergodic_pure: bool
    fixed_point: np.ndarray | None  # density matrix when the fixed space is one-dimensional
    purity_of_fixed_point: float
    fixed_operators: tuple[np.ndarray, ...]  # basis of the eigenvalue-1 eigenspace
    fixed_state: np.ndarray | None  # dominant eigenvector of fixed_point
    block_sizes: tuple[int, ...]
    dropped_norm: float
    # second largest modulus inside the symmetry block that holds the fixed
    # point; this block carries the populations, so it sets the decay of
    # 1 - <0|tau^n(rho)|0>. Equals kappa when the superoperator is one block.
    kappa_fixed_block: float = float("nan")

    @property
    def n_fixed(self) -> int:
        return len(self.fixed_operators)

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.eigenvalues)


def _superop_blocks(s: np.ndarray) -> tuple[list[np.ndarray], float]:
    """Index sets of the connected components of the superoperator's sparsity graph."""
    scale = float(np.max(np.abs(s)))
    mask = np.abs(s) > TOL.structural_zero * scale
    dropped = float(np.linalg.norm(np.where(mask, 0, s)))
    n_comp, labels = connected_components(csr_matrix(mask | mask.T), directed=False)
    return [np.flatnonzero(labels == c) for c in range(n_comp)], dropped


def _sort_spectrum(w: np.ndarray) -> np.ndarray:
    order = np.lexsort((np.round(w.imag, 12), -np.round(w.real, 12), -np.round(np.abs(w), 12)))
    return w[order]


def diagnose(ch: QuantumChannel) -> ChannelDiagnostics:
    """Spectrum, fixed points and mixing rate of a channel.

    The superoperator is split into the connected components of its nonzero
    pattern (exact symmetry blocks, e.g. fixed coherence order under
    number-conserving dynamics) and each block goes through a general complex
    eigensolver. A degenerate eigenvalue 1 is reported, not raised.
    """
    d = ch.dim
    s = ch.superop
    blocks, dropped = _superop_blocks(s)
    eigs = []
    fixed_vecs = []
    kappa_block = float("nan")
    for idx in blocks:
        sub = s[np.ix_(idx, idx)]
        w = np.linalg.eigvals(sub)
        eigs.append(w)
        near_one = np.abs(w - 1) <= TOL.degeneracy_gap
        n_one = int(np.sum(near_one))
        if n_one:
            rest = np.abs(w[~near_one])
            kappa_block = float(rest.max()) if rest.size else 0.0
            _, _, vh = np.linalg.svd(sub - np.eye(len(idx)))
            for row in vh[-n_one:]:
                full = np.zeros(d * d, dtype=complex)
                full[idx] = row.conj()
                fixed_vecs.append(full)
    w = _sort_spectrum(np.concatenate(eigs))
    kappa = float(np.abs(w[1])) if w.size > 1 else 0.0
    fixed_ops = tuple(unvec(v, d) for v in fixed_vecs)

    fixed_point = None
    fixed_state = None
    pur = float("nan")
    if len(fixed_ops) == 1:
        x = fixed_ops[0]
        x = x / np.trace(x)
        fixed_point = (x + x.conj().T) / 2
        pur = purity(fixed_point)
        vals, vecs = np.linalg.eigh(fixed_point)
        top = vecs[:, -1]
        k = int(np.argmax(np.abs(top)))
        fixed_state = top * (abs(top[k]) / top[k])
    ergodic = len(fixed_ops) == 1 and pur >= 1 - TOL.fixed_point_purity
    return ChannelDiagnostics(
        eigenvalues=w,
        kappa=kappa,
        ergodic_pure=bool(ergodic),
        fixed_point=fixed_point,
        purity_of_fixed_point=pur,
        fixed_operators=fixed_ops,
        fixed_state=fixed_state,
        block_sizes=tuple(len(b) for b in blocks),
        dropped_norm=dropped,
        kappa_fixed_block=kappa_block if len(fixed_ops) == 1 else float("nan"),
    )


class NotErgodicError(RuntimeError):
    def __init__(self, message: str, diagnostics: ChannelDiagnostics):
        super().__init__(
            f"{message}: {diagnostics.n_fixed} fixed operator(s), "
            f"fixed-point purity {diagnostics.purity_of_fixed_point:.6g}, kappa {diagnostics.kappa:.6g}"
        )
        self.diagnostics = diagnostics


def require_ergodic(diag: ChannelDiagnostics, what: str = "channel") -> ChannelDiagnostics:
    if not diag.ergodic_pure:
        raise NotErgodicError(f"{what} is not ergodic with a pure fixed point", diag)
    return diag


def iterate(ch: QuantumChannel, rho: np.ndarray, n: int) -> np.ndarray:
    """tau^n(rho)."""
    if n < 0:
        raise ValueError("iteration count must be non-negative")
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.dim, ch.dim):
        raise ValueError(f"state has shape {rho.shape}, channel acts on dimension {ch.dim}")
    for _ in range(n):
        rho = ch(rho)
    return rho


def orbit(ch: QuantumChannel, rho: np.ndarray, n: int) -> list[np.ndarray]:
    """[rho, tau(rho), ..., tau^n(rho)]."""
    out = [np.asarray(rho, dtype=complex)]
    for _ in range(n):
        out.append(ch(out[-1]))
    return out


def overlap(rho: np.ndarray, state: np.ndarray) -> float:
    state = np.asarray(state).ravel()
    return float(np.real(state.conj() @ rho @ state))


def overlap_deficit(rho: np.ndarray, state: np.ndarray) -> float:
    """Tr[rho] - <state|rho|state>, summed over the orthogonal complement of ``state``.

    Avoids the cancellation of ``1 - <state|rho|state>`` when the overlap is
    close to one.
    """
    state = np.asarray(state).ravel()
    comp = null_space(state.conj()[None, :])
    return float(np.real(np.trace(comp.conj().T @ rho @ comp)))


def eta_from_channel(ch: QuantumChannel, rho_prime: np.ndarray, L: int, zero_cbar: np.ndarray) -> float:
    """<0|tau^(L-1)(rho')|0> on the uncontrolled region."""
    if L < 1:
        raise ValueError("L must be at least 1")
    return overlap(iterate(ch, rho_prime, L - 1), zero_cbar)


class RateFit(NamedTuple):
    rate: float
    prefactor: float


def convergence_fit(etas: Sequence[float], L_values: Sequence[float] | None = None) -> RateFit:
    """Fit 1 - eta ~ prefactor * exp(rate * L) over the tail half of the sequence."""
    return convergence_fit_deficits(1.0 - np.asarray(etas, dtype=float), L_values)


def convergence_fit_deficits(deficits: Sequence[float], L_values: Sequence[float] | None = None) -> RateFit:
    """Same as :func:`convergence_fit`, given 1 - eta directly."""
    y = np.asarray(deficits, dtype=float)
    x = np.arange(1, y.size + 1, dtype=float) if L_values is None else np.asarray(L_values, dtype=float)
    if x.shape != y.shape:
        raise ValueError("L_values and deficits differ in length")
    if int(np.sum(y > TOL.eta_floor)) < 8:
        raise ValueError("need at least 8 points with 1 - eta above the numerical floor")
    tail = slice(y.size // 2, None)
    if np.any(y[tail] <= TOL.eta_floor):
        raise ValueError("sequence reached the numerical floor; shorten it before fitting")
    slope, intercept = np.polyfit(x[tail], np.log(y[tail]), 1)
    return RateFit(float(slope), float(np.exp(intercept)))
