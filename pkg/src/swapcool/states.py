"""Named initial states on C (x) C-bar, returned in register order."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .network import SpinNetwork

LABELS = ("vacuum", "all_ones", "ghz", "w", "mixed")


def to_register_order(psi: np.ndarray, net: SpinNetwork) -> np.ndarray:
    """Reorder a state given in site order (site j at qubit j) into register order."""
    n = net.n_qubits
    order = list(net.register_order)
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim == 1:
        return np.transpose(psi.reshape([2] * n), order).reshape(-1)
    t = psi.reshape([2] * (2 * n))
    return np.transpose(t, order + [n + k for k in order]).reshape(2**n, 2**n)


def named_state(label: str, net: SpinNetwork) -> np.ndarray:
    """State vector (or density matrix for ``mixed``) for one of :data:`LABELS`."""
    n = net.n_qubits
    dim = 2**n
    if label == "vacuum":
        psi = np.zeros(dim, dtype=complex)
        psi[0] = 1
    elif label == "all_ones":
        psi = np.zeros(dim, dtype=complex)
        psi[-1] = 1
    elif label == "ghz":
        psi = np.zeros(dim, dtype=complex)
        psi[0] = psi[-1] = 1 / np.sqrt(2)
    elif label == "w":
        psi = np.zeros(dim, dtype=complex)
        psi[[1 << b for b in range(n)]] = 1 / np.sqrt(n)
    elif label == "mixed":
        return np.eye(dim, dtype=complex) / dim
    else:
        raise ValueError(f"unknown initial state {label!r}; expected one of {', '.join(LABELS)} or @FILE")
    # every named pure state is symmetric under site permutations
    return psi


def load_amplitudes(path: str | Path, net: SpinNetwork) -> np.ndarray:
    """Read amplitudes in site order, one per line as ``re`` or ``re im``; normalise."""
    data = np.loadtxt(path, ndmin=2, comments="#")
    if data.shape[1] == 1:
        psi = data[:, 0].astype(complex)
    elif data.shape[1] == 2:
        psi = data[:, 0] + 1j * data[:, 1]
    else:
        raise ValueError(f"{path}: expected one or two columns, got {data.shape[1]}")
    if psi.size != 2**net.n_qubits:
        raise ValueError(f"{path}: {psi.size} amplitudes for a {net.n_qubits}-qubit network")
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ValueError(f"{path}: zero vector")
    return to_register_order(psi / nrm, net)


def resolve_state(value: str, net: SpinNetwork) -> np.ndarray:
    if value.startswith("@"):
        return load_amplitudes(value[1:], net)
    return named_state(value, net)


def haar_states(rng: np.random.Generator, dim: int, count: int) -> np.ndarray:
    """``count`` Haar-random pure states as rows, drawn from normalised complex Gaussians."""
    z = rng.normal(size=(count, dim)) + 1j * rng.normal(size=(count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
