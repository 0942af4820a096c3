"""Spin networks, Heisenberg Hamiltonians and excitation-number observables.

Spin convention: |0> is spin-down and |1> is spin-up, with Z|0> = -|0> and
Z|1> = +|1>. Hence Z = diag(-1, +1) in the computational basis and the
excitation number (Z + 1) / 2 counts the |1>s. This is the opposite sign of
the usual ``diag(1, -1)`` Pauli Z; X is the usual one and Y is chosen so that
XY = iZ still holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .tolerances import MAX_HEISENBERG_QUBITS

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "Z": np.array([[-1, 0], [0, 1]], dtype=complex),
}


@dataclass(frozen=True)
class SpinNetwork:
    """Weighted coupling graph on ``n_qubits`` spins with a controlled region.

    ``edges`` holds ``(j, j2, coupling)`` triples. ``controlled`` is the
    ordered list of sites in C; the remaining sites, in increasing order, form
    the uncontrolled region.
    """

    n_qubits: int
    edges: tuple[tuple[int, int, float], ...]
    controlled: tuple[int, ...]
    positions: dict[int, tuple[float, float]] = field(default_factory=dict, compare=False)
    default_t: float | None = None

    def __post_init__(self):
        n = self.n_qubits
        if n < 2:
            raise ValueError("a spin network needs at least two sites")
        seen = set()
        edges = []
        for j, k, d in self.edges:
            j, k = int(j), int(k)
            if j == k:
                raise ValueError(f"edge ({j}, {k}) joins a site to itself")
            if not (0 <= j < n and 0 <= k < n):
                raise ValueError(f"edge ({j}, {k}) has an endpoint outside 0..{n - 1}")
            key = (min(j, k), max(j, k))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            edges.append((j, k, float(d)))
        object.__setattr__(self, "edges", tuple(edges))
        ctrl = tuple(int(c) for c in self.controlled)
        if len(set(ctrl)) != len(ctrl):
            raise ValueError("controlled sites must be distinct")
        if not ctrl:
            raise ValueError("the controlled region must contain at least one site")
        if any(not 0 <= c < n for c in ctrl):
            raise ValueError(f"controlled site outside 0..{n - 1}")
        if len(ctrl) >= n:
            raise ValueError("the uncontrolled region must contain at least one site")
        object.__setattr__(self, "controlled", ctrl)

    @property
    def uncontrolled(self) -> tuple[int, ...]:
        ctrl = set(self.controlled)
        return tuple(s for s in range(self.n_qubits) if s not in ctrl)

    @property
    def register_order(self) -> tuple[int, ...]:
        """Sites in register order: C first, then the uncontrolled region."""
        return self.controlled + self.uncontrolled

    @property
    def n_controlled(self) -> int:
        return len(self.controlled)

    @property
    def n_uncontrolled(self) -> int:
        return self.n_qubits - len(self.controlled)

    @property
    def max_coupling(self) -> float:
        return max((abs(d) for _, _, d in self.edges), default=0.0)

    def with_controlled(self, sites: Iterable[int]) -> "SpinNetwork":
        return replace(self, controlled=tuple(sites))


def chain(n: int, coupling: float = 1.0, controlled: Sequence[int] = (0,)) -> SpinNetwork:
    """Open chain 0-1-...-(n-1) with equal couplings."""
    return SpinNetwork(n, tuple((j, j + 1, coupling) for j in range(n - 1)), tuple(controlled))


def pauli_string(ops: dict[int, str], n: int) -> np.ndarray:
    """Tensor product with ``ops[pos]`` at each listed position and identities elsewhere."""
    for pos, axis in ops.items():
        if not 0 <= pos < n:
            raise IndexError(f"site {pos} out of range for {n} qubits")
        if axis not in PAULI:
            raise ValueError(f"unknown Pauli axis {axis!r}")
    out = np.ones((1, 1), dtype=complex)
    for pos in range(n):
        out = np.kron(out, PAULI[ops.get(pos, "I")])
    return out


def pauli_on(site: int, axis: str, n: int) -> np.ndarray:
    return pauli_string({site: axis}, n)


def build_heisenberg(net: SpinNetwork, order: Sequence[int] | None = None) -> np.ndarray:
    """Heisenberg Hamiltonian sum_e d_e (XX + YY + ZZ) on 2**n dimensions.

    ``order`` lists the sites by qubit position (position 0 most significant);
    by default site j sits at position j. Pass ``net.register_order`` to get
    the Hamiltonian on C (x) C-bar.
    """
    n = net.n_qubits
    if n > MAX_HEISENBERG_QUBITS:
        raise ValueError(f"{n} spins exceeds the dense construction cap of {MAX_HEISENBERG_QUBITS}")
    order = tuple(range(n)) if order is None else tuple(order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"order {order} is not a permutation of the {n} sites")
    pos = {site: p for p, site in enumerate(order)}
    h = np.zeros((2**n, 2**n), dtype=complex)
    for j, k, d in net.edges:
        for axis in "XYZ":
            h += d * pauli_string({pos[j]: axis, pos[k]: axis}, n)
    return h


def excitation_counts(n: int) -> np.ndarray:
    """Number of |1> sites in each computational basis state."""
    idx = np.arange(2**n)
    return np.array([bin(i).count("1") for i in idx], dtype=float)


def excitation_number(n: int) -> np.ndarray:
    """N = sum_k (Z_k + 1) / 2 as a diagonal matrix."""
    if n < 1:
        raise ValueError("need at least one qubit")
    return np.diag(excitation_counts(n)).astype(complex)


def total_magnetization(n: int) -> np.ndarray:
    return np.diag(2 * excitation_counts(n) - n).astype(complex)


class GraphParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def parse_graph(text: str) -> SpinNetwork:
    """Parse the line-oriented graph format.

    Recognised lines (``#`` starts a comment)::

        n <count>
        edge <j> <j'> <coupling>|auto
        control <site> [<site> ...]
        pos <site> <x> <y>
        t <time>

    ``auto`` couplings are the Euclidean distance between the two ``pos``
    entries. The optional ``t`` line records a suggested time step.
    """
    n = None
    raw_edges: list[tuple[int, int, int, str]] = []
    control: list[int] = []
    positions: dict[int, tuple[float, float]] = {}
    default_t = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, *args = line.split()
        try:
            if key == "n":
                if len(args) != 1:
                    raise GraphParseError(lineno, "expected 'n <count>'")
                n = int(args[0])
            elif key == "edge":
                if len(args) != 3:
                    raise GraphParseError(lineno, "expected 'edge <j> <j'> <coupling>|auto'")
                raw_edges.append((lineno, int(args[0]), int(args[1]), args[2]))
            elif key == "control":
                if not args:
                    raise GraphParseError(lineno, "control needs at least one site")
                control.extend(int(a) for a in args)
            elif key == "t":
                if len(args) != 1:
                    raise GraphParseError(lineno, "expected 't <time>'")
                default_t = float(args[0])
                if not default_t > 0:
                    raise GraphParseError(lineno, "time step must be positive")
            elif key == "pos":
                if len(args) != 3:
                    raise GraphParseError(lineno, "expected 'pos <site> <x> <y>'")
                positions[int(args[0])] = (float(args[1]), float(args[2]))
            else:
                raise GraphParseError(lineno, f"unknown directive {key!r}")
        except GraphParseError:
            raise
        except ValueError as exc:
            raise GraphParseError(lineno, str(exc)) from None
    if n is None:
        raise GraphParseError(0, "missing 'n <count>' line")
    edges = []
    for lineno, j, k, c in raw_edges:
        if c == "auto":
            if j not in positions or k not in positions:
                raise GraphParseError(lineno, f"auto coupling needs pos lines for sites {j} and {k}")
            (x1, y1), (x2, y2) = positions[j], positions[k]
            d = math.hypot(x1 - x2, y1 - y2)
        else:
            try:
                d = float(c)
            except ValueError:
                raise GraphParseError(lineno, f"bad coupling {c!r}") from None
        edges.append((j, k, d))
    try:
        return SpinNetwork(n, tuple(edges), tuple(control), positions, default_t)
    except ValueError as exc:
        raise GraphParseError(0, str(exc)) from None


def load_graph(path: str | Path) -> SpinNetwork:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def shipped_graph(name: str) -> Path:
    """Path of a graph file bundled with the package (e.g. ``"fig1_seven_spin"``)."""
    return Path(__file__).parent / "data" / f"{name}.graph"
