"""Numerical tolerances shared by the library and its tests."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    unitary: float = 1e-10
    trace: float = 1e-10
    psd: float = 1e-10
    # eigenvalue 1 counts as nondegenerate only if every other eigenvalue is
    # farther than this from 1
    degeneracy_gap: float = 1e-9
    fixed_point_purity: float = 1e-9
    # superoperator entries below this (relative to the largest) are treated
    # as structural zeros when splitting the spectrum into blocks
    structural_zero: float = 1e-13
    # singular values below this are treated as null directions in polar
    singular: float = 1e-12
    c_factor: float = 1e-8
    eta_floor: float = 1e-13


TOL = Tolerances()

MAX_HEISENBERG_QUBITS = 10
MAX_REGISTER_QUBITS = 22
MAX_CBAR_QUBITS = 6
