"""Code vectors, the decoding/encoding unitaries and the transfer fidelities.

Running the swap stage on each computational basis state |k> of C (x) C-bar
leaves the memory in a code vector |phi_k>. The linear map D sends the k-th
memory basis vector |k>_M to |phi_k>; its best unitary approximation V (the
polar factor) is the decoder for downloads, and the same construction with
W' gives the encoder V' for uploads.

All algebra stays in the d-dimensional code subspace (d = dim C (x) C-bar).
With Phi the d_M x d matrix of code vectors and Phi = Q R its thin QR
factorisation, the coordinate matrix of D is R, and the decoder acts on the
code subspace as Q @ polar(R).v. |k>_M is the k-th computational state of
the first log2(d) memory qubits with every other memory qubit in |0>.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, NamedTuple

import numpy as np
from scipy.linalg import null_space, orth

from .channel import require_ergodic
from .linalg import canonical_basis, polar_decompose
from .protocol import (
    ProtocolConfig,
    apply_W,
    apply_W_prime,
    apply_W_prime_dagger,
    decompose_after_W,
    swap_stage,
)

Direction = Literal["forward", "reverse"]

CODEMAP_FORMAT = "swapcool.codemap/1"

__all__ = [
    "CodeMap",
    "CodeMapError",
    "compute_code_map",
    "decoder_residual_bound",
    "fidelity_down",
    "fidelity_up",
    "roundtrip_fidelity",
    "bound_down",
    "bound_up",
    "MemoryUnitary",
    "DownloadFidelity",
    "UploadFidelity",
    "save_code_map",
    "load_code_map_summary",
]


class CodeMapError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class CodeMap:
    direction: Direction
    L: int
    t: float
    n_c: int
    n_cbar: int
    basis_labels: tuple[str, ...]
    phi: np.ndarray = field(repr=False)  # d_M x d, column k is |phi_k>
    gram: np.ndarray = field(repr=False)
    eta_list: np.ndarray = field(repr=False)
    one_minus_eta: np.ndarray = field(repr=False)
    frame: np.ndarray = field(repr=False)  # d_M x d orthonormal basis of span(phi)
    coords: np.ndarray = field(repr=False)  # R = frame^dag phi, the coordinate matrix of D
    decoder: np.ndarray = field(repr=False)  # polar factor of coords, d x d unitary
    residual: float = 0.0
    unique: bool = True
    code_indices: np.ndarray = field(default=None, repr=False)  # memory index of |k>_M
    zero_cbar: np.ndarray = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.gram.shape[0]

    @property
    def d_memory(self) -> int:
        return self.phi.shape[0]

    @property
    def eta0(self) -> float:
        return float(np.min(self.eta_list))

    @property
    def one_minus_eta0(self) -> float:
        return float(np.max(self.one_minus_eta))

    @property
    def isometry(self) -> np.ndarray:
        """V restricted to the code subspace: column k is V|k>_M (d_M x d)."""
        return self.frame @ self.decoder

    def d_dag_d_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.gram)

    def max_offdiagonal(self) -> float:
        g = np.abs(self.gram - np.diag(np.diag(self.gram)))
        return float(g.max()) if self.d > 1 else 0.0

    def code_state(self, alpha: np.ndarray) -> np.ndarray:
        """|psi>_M = sum_k alpha_k |k>_M as a memory vector."""
        out = np.zeros(self.d_memory, dtype=complex)
        out[self.code_indices] = alpha
        return out

    def memory_unitary(self) -> "MemoryUnitary":
        return MemoryUnitary.from_code_map(self)

    def to_dict(self) -> dict:
        def cmat(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]

        return {
            "format": CODEMAP_FORMAT,
            "direction": self.direction,
            "L": self.L,
            "t": self.t,
            "n_c": self.n_c,
            "n_cbar": self.n_cbar,
            "basis_labels": list(self.basis_labels),
            "eta_list": [float(x) for x in self.eta_list],
            "one_minus_eta": [float(x) for x in self.one_minus_eta],
            "eta0": self.eta0,
            "residual": self.residual,
            "unique": self.unique,
            "gram": cmat(self.gram),
            "decoder": cmat(self.decoder),
        }


def save_code_map(code: CodeMap, path: str | Path) -> None:
    Path(path).write_text(json.dumps(code.to_dict(), indent=1), encoding="utf-8")


def load_code_map_summary(path: str | Path) -> dict:
    """Read a saved code map; complex matrices come back as numpy arrays."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("format") != CODEMAP_FORMAT:
        raise ValueError(f"unsupported code map format {data.get('format')!r}")
    for key in ("gram", "decoder"):
        a = np.asarray(data[key], dtype=float)
        data[key] = a[..., 0] + 1j * a[..., 1]
    for key in ("eta_list", "one_minus_eta"):
        data[key] = np.asarray(data[key], dtype=float)
    return data


def _code_indices(cfg: ProtocolConfig) -> np.ndarray:
    lay = cfg.layout
    n_sys = lay.n_c + lay.n_cbar
    n_mem = lay.L * lay.n_c
    if n_mem < n_sys:
        raise CodeMapError(
            f"memory holds {n_mem} qubits but the system has {n_sys}; need L >= {math.ceil(n_sys / lay.n_c)}"
        )
    return np.arange(lay.d_system) << (n_mem - n_sys)


def compute_code_map(cfg: ProtocolConfig, direction: Direction = "forward") -> CodeMap:
    """Code vectors, Gram matrix and polar decoder for ``direction``.

    ``forward`` builds the download decoder V from W; ``reverse`` builds the
    upload encoder V' from W'. The relevant channel must be ergodic with a
    pure fixed point, and every eta_k must reach 0.5.
    """
    diag = cfg.channel_diagnostics(direction)
    require_ergodic(diag, f"{direction} channel")
    zero_cbar = diag.fixed_state
    lay = cfg.layout
    lay.check_cap(cfg.register_cap)
    idx = _code_indices(cfg)
    d = lay.d_system
    phis, etas, omes = [], [], []
    for k in range(d):
        e = np.zeros(d, dtype=complex)
        e[k] = 1
        dec = decompose_after_W(swap_stage(e, cfg, direction), cfg, direction, zero_cbar)
        etas.append(dec.eta)
        omes.append(dec.one_minus_eta)
        phis.append(dec.phi if dec.phi is not None else np.zeros(lay.d_memory, dtype=complex))
    etas = np.array(etas)
    if etas.min() < 0.5:
        kb = diag.kappa_fixed_block
        worst = float(max(omes))
        hint = ""
        if 0 < kb < 1:
            hint = f"; estimated L >= {cfg.L + math.ceil(math.log(0.5 / worst) / math.log(kb))} needed"
        raise CodeMapError(f"min eta_k = {etas.min():.4g} < 0.5 at L = {cfg.L}{hint}")
    phi = np.column_stack(phis)
    gram = phi.conj().T @ phi
    q, r = np.linalg.qr(phi)
    polar = polar_decompose(r)
    residual = float(np.linalg.norm(r - polar.v))
    order = cfg.network.register_order
    labels = tuple(
        ",".join(f"{s}:{b}" for s, b in zip(order, format(k, f"0{lay.n_c + lay.n_cbar}b"))) for k in range(d)
    )
    return CodeMap(
        direction=direction,
        L=cfg.L,
        t=float(cfg.t),
        n_c=lay.n_c,
        n_cbar=lay.n_cbar,
        basis_labels=labels,
        phi=phi,
        gram=gram,
        eta_list=etas,
        one_minus_eta=np.array(omes),
        frame=q,
        coords=r,
        decoder=polar.v,
        residual=residual,
        unique=polar.unique,
        code_indices=idx,
        zero_cbar=zero_cbar,
    )


class ResidualBound(NamedTuple):
    lhs: float
    rhs: float


def decoder_residual_bound(code: CodeMap) -> ResidualBound:
    """(||D - V||_F, sqrt(3) d (1 - eta0)^(1/4))."""
    return ResidualBound(code.residual, math.sqrt(3) * code.d * code.one_minus_eta0**0.25)


def bound_down(eta0: float, d: int) -> float:
    """Guaranteed download fidelity eta0 - 10 d (1 - eta0)^(1/4); may be negative."""
    return eta0 - 10 * d * max(0.0, 1 - eta0) ** 0.25


def bound_up(eta0_prime: float, d: int) -> float:
    return bound_down(eta0_prime, d)


@dataclass(frozen=True, eq=False)
class MemoryUnitary:
    """A unitary on the full memory that agrees with V on the code subspace.

    It acts as the identity outside S = span(code subspace, range of V); inside
    S the images of the orthogonal complement are fixed by pairing canonical
    bases of the two complements in index order.
    """

    basis: np.ndarray  # d_M x s orthonormal basis of S
    inner: np.ndarray  # s x s unitary

    @classmethod
    def from_code_map(cls, code: CodeMap) -> "MemoryUnitary":
        j = np.zeros((code.d_memory, code.d), dtype=complex)
        j[code.code_indices, np.arange(code.d)] = 1
        v = code.isometry
        b = orth(np.hstack([j, v]))
        js = b.conj().T @ j
        vs = b.conj().T @ v
        s = b.shape[1]
        inner = vs @ js.conj().T
        if s > code.d:
            nj = canonical_basis(null_space(js.conj().T))
            nv = canonical_basis(null_space(vs.conj().T))
            inner = inner + nv @ nj.conj().T
        return cls(b, inner)

    def apply_rows(self, y: np.ndarray, adjoint: bool = False) -> np.ndarray:
        """Apply the unitary (or its adjoint) to every row of ``y`` (rows are memory vectors)."""
        inner = self.inner.conj().T if adjoint else self.inner
        c = y @ self.basis.conj()
        return y - c @ self.basis.T + (c @ inner.T) @ self.basis.T


class DownloadFidelity(NamedTuple):
    fidelity: float
    lower_estimate: float  # eta |<phi|V|psi>|^2
    bound: float  # eta0 - 10 d (1 - eta0)^(1/4)


class UploadFidelity(NamedTuple):
    fidelity: float
    lower_estimate: float  # eta' |<phi'|V'|psi>|^2
    bound: float


def _check(cfg: ProtocolConfig, code: CodeMap, direction: Direction) -> None:
    if code.direction != direction:
        raise ValueError(f"expected a {direction} code map, got {code.direction}")
    if code.L != cfg.L or abs(code.t - cfg.t) > 0 or code.n_c != cfg.layout.n_c or code.n_cbar != cfg.layout.n_cbar:
        raise ValueError("code map was computed for a different configuration")


def _normalised(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return psi / np.linalg.norm(psi)


def fidelity_down(psi: np.ndarray, cfg: ProtocolConfig, code: CodeMap) -> DownloadFidelity:
    """<psi|_M V^dag R_M V |psi>_M for the memory state R_M left by W."""
    _check(cfg, code, "forward")
    psi = _normalised(psi)
    full = apply_W(psi, cfg)
    y = full.reshape(cfg.layout.d_system, -1)
    chi = code.isometry @ psi
    f = float(np.real(np.vdot(y @ chi.conj(), y @ chi.conj())))
    dec = decompose_after_W(full, cfg, "forward", code.zero_cbar)
    est = dec.eta * abs(np.vdot(dec.phi, chi)) ** 2 if dec.phi is not None else 0.0
    return DownloadFidelity(f, float(est), bound_down(code.eta0, code.d))


def fidelity_up(psi: np.ndarray, cfg: ProtocolConfig, code: CodeMap) -> UploadFidelity:
    """Fidelity of W'^dag V' (|psi>_M |0>_{C C-bar}) with |psi> on the system.

    ``psi`` gives the payload coordinates in the computational basis of C (x) C-bar.
    """
    _check(cfg, code, "reverse")
    psi = _normalised(psi)
    lay = cfg.layout
    chi = code.isometry @ psi
    start = np.kron(np.kron(cfg.zero_c, code.zero_cbar), chi)
    y = apply_W_prime_dagger(start, cfg).reshape(lay.d_system, -1)
    amp = psi.conj() @ y
    f = float(np.real(np.vdot(amp, amp)))
    dec = decompose_after_W(apply_W_prime(psi, cfg), cfg, "reverse", code.zero_cbar)
    est = dec.eta * abs(np.vdot(dec.phi, chi)) ** 2 if dec.phi is not None else 0.0
    return UploadFidelity(f, float(est), bound_up(code.eta0, code.d))


def roundtrip_fidelity(psi: np.ndarray, cfg: ProtocolConfig, down: CodeMap, up: CodeMap) -> float:
    """Download, decode, re-encode and upload in one coherent run; overlap with |psi>."""
    _check(cfg, down, "forward")
    _check(cfg, up, "reverse")
    psi = _normalised(psi)
    lay = cfg.layout
    y = apply_W(psi, cfg).reshape(lay.d_system, -1)
    y = down.memory_unitary().apply_rows(y, adjoint=True)
    y = up.memory_unitary().apply_rows(y)
    y = apply_W_prime_dagger(y.reshape(-1), cfg).reshape(lay.d_system, -1)
    amp = psi.conj() @ y
    return float(np.real(np.vdot(amp, amp)))


def embed_memory(code: CodeMap, cfg: ProtocolConfig, alpha: np.ndarray) -> np.ndarray:
    """|0>_C |0>_C-bar (x) |alpha>_M with the payload written in code coordinates."""
    return np.kron(np.kron(cfg.zero_c, code.zero_cbar), code.code_state(alpha))

