import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density
from swapcool.channel import (
    NotErgodicError,
    QuantumChannel,
    convergence_fit,
    convergence_fit_deficits,
    diagnose,
    eta_from_channel,
    iterate,
    make_tau,
    make_tau_prime,
    orbit,
    overlap,
    overlap_deficit,
    require_ergodic,
    unvec,
    vec,
)
from swapcool.linalg import evolve_unitary, partial_trace, trace_distance
from swapcool.network import build_heisenberg, chain, load_graph, parse_graph, shipped_graph

E0 = np.array([1.0, 0.0])
SWAP = np.eye(4)[[0, 2, 1, 3]]


def pair_u(t):
    return evolve_unitary(build_heisenberg(chain(2)), t)


def tau_by_definition(u, zero_c, rho, dims):
    d_c, _ = dims
    big = u @ np.kron(np.outer(zero_c, zero_c.conj()), rho) @ u.conj().T
    return partial_trace(big, list(dims), [1])


def test_vec_roundtrip_is_column_stacking(rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    v = vec(m)
    np.testing.assert_array_equal(v[:3], m[:, 0])
    np.testing.assert_array_equal(unvec(v, 3), m)


def test_superop_acts_like_kraus(rng):
    ch = make_tau(pair_u(1.0), E0, (2, 2))
    for _ in range(10):
        rho = random_density(rng, 2)
        np.testing.assert_allclose(unvec(ch.superop @ vec(rho), 2), ch(rho), atol=1e-14)


def test_identity_unitary_gives_identity_channel(rng):
    ch = make_tau(np.eye(4), E0, (2, 2))
    rho = random_density(rng, 2)
    np.testing.assert_allclose(ch(rho), rho, atol=1e-15)
    np.testing.assert_allclose(make_tau_prime(np.eye(4), E0, (2, 2))(rho), rho, atol=1e-15)
    diag = diagnose(ch)
    np.testing.assert_allclose(diag.eigenvalues, np.ones(4), atol=1e-12)
    assert not diag.ergodic_pure
    assert diag.n_fixed == 4
    with pytest.raises(NotErgodicError) as exc:
        require_ergodic(diag, "identity")
    assert exc.value.diagnostics is diag


def test_swap_gives_replacement_channel(rng):
    ch = make_tau(SWAP, E0, (2, 2))
    for _ in range(5):
        np.testing.assert_allclose(ch(random_density(rng, 2)), np.diag([1.0, 0.0]), atol=1e-15)
    diag = diagnose(ch)
    np.testing.assert_allclose(np.abs(diag.eigenvalues), [1, 0, 0, 0], atol=1e-12)
    assert diag.kappa == pytest.approx(0, abs=1e-12)
    assert diag.ergodic_pure
    np.testing.assert_allclose(diag.fixed_point, np.diag([1.0, 0.0]), atol=1e-12)
    np.testing.assert_allclose(iterate(ch, random_density(rng, 2), 1), np.diag([1.0, 0.0]), atol=1e-15)


def test_kraus_matches_partial_trace_definition(rng):
    u = pair_u(1.0)
    ch = make_tau(u, E0, (2, 2))
    for _ in range(50):
        rho = random_density(rng, 2)
        np.testing.assert_allclose(ch(rho), tau_by_definition(u, E0, rho, (2, 2)), atol=1e-12)


def test_kraus_matches_definition_larger(rng):
    net = chain(4, controlled=(0, 1))
    u = evolve_unitary(build_heisenberg(net, net.register_order), 0.6)
    zc = np.array([0.6, 0.0, 0.8j, 0.0])
    ch = make_tau(u, zc, (4, 4))
    for _ in range(5):
        rho = random_density(rng, 4)
        np.testing.assert_allclose(ch(rho), tau_by_definition(u, zc, rho, (4, 4)), atol=1e-12)


def test_tau_prime_is_tau_of_adjoint():
    u = pair_u(0.7)
    np.testing.assert_allclose(make_tau_prime(u, E0, (2, 2)).superop, make_tau(u.conj().T, E0, (2, 2)).superop, atol=1e-12)
    assert make_tau_prime(u, E0, (2, 2)).completeness_defect() <= 1e-10


@pytest.mark.parametrize("t", [0.3, 1.0, 2.2])
def test_pair_channel_is_amplitude_damping(t):
    # U|0a> = e^{it}(cos 2t |0a> - i sin 2t |a0>) gives amplitude damping with gamma = sin^2 2t
    diag = diagnose(make_tau(pair_u(t), E0, (2, 2)))
    c = np.cos(2 * t)
    assert diag.kappa == pytest.approx(abs(c), abs=1e-12)
    assert diag.kappa_fixed_block == pytest.approx(c**2, abs=1e-12)
    np.testing.assert_allclose(sorted(np.abs(diag.eigenvalues)), sorted([1, c**2, abs(c), abs(c)]), atol=1e-12)
    assert diag.ergodic_pure
    np.testing.assert_allclose(np.abs(diag.fixed_state), [1, 0], atol=1e-12)


def test_invalid_channel_inputs():
    with pytest.raises(ValueError):
        QuantumChannel(())
    with pytest.raises(ValueError):
        QuantumChannel((np.eye(2), np.eye(3)))
    with pytest.raises(ValueError):
        make_tau(np.ones((4, 4)), E0, (2, 2))
    with pytest.raises(ValueError):
        make_tau(np.eye(4), np.array([1.0, 1.0]), (2, 2))
    with pytest.raises(ValueError):
        make_tau(np.eye(4), E0, (2, 3))
    ch = make_tau(np.eye(4), E0, (2, 2))
    with pytest.raises(ValueError):
        ch(np.eye(3))
    with pytest.raises(ValueError):
        iterate(ch, np.eye(2) / 2, -1)


@pytest.fixture(scope="module")
def chain3_tau():
    net = chain(3)
    u = evolve_unitary(build_heisenberg(net, net.register_order), 1.0)
    return make_tau(u, E0, (2, 4))


def test_trace_preservation_and_complete_positivity(chain3_tau, rng):
    for _ in range(100):
        rho = random_density(rng, 4)
        assert abs(np.trace(chain3_tau(rho)) - 1) <= 1e-10
    assert np.linalg.eigvalsh(chain3_tau.choi()).min() >= -1e-9
    # Choi of the identity channel is the unnormalised maximally entangled projector
    ident = make_tau(np.eye(4), E0, (2, 2)).choi()
    omega = np.eye(2).reshape(-1)
    np.testing.assert_allclose(ident, np.outer(omega, omega), atol=1e-15)


def test_spectrum_in_conjugate_pairs(chain3_tau):
    w = diagnose(chain3_tau).eigenvalues
    for z in w:
        assert np.min(np.abs(w - np.conj(z))) <= 1e-9


def test_diagnostics_invariants(chain3_tau):
    diag = diagnose(chain3_tau)
    assert diag.moduli[0] == pytest.approx(1, abs=1e-9)
    assert diag.kappa == pytest.approx(diag.moduli[1])
    assert diag.kappa <= 1
    assert diag.ergodic_pure
    assert diag.purity_of_fixed_point >= 1 - 1e-9
    # the fixed point is the all-down state
    assert overlap(diag.fixed_point, np.eye(4)[0]) == pytest.approx(1, abs=1e-9)
    # blockwise eigensolve agrees with a dense one at this size
    dense = np.sort_complex(np.round(np.linalg.eigvals(chain3_tau.superop), 9))
    np.testing.assert_allclose(np.sort_complex(np.round(diag.eigenvalues, 9)), dense, atol=1e-8)
    assert sum(diag.block_sizes) == 16
    assert diag.dropped_norm < 1e-10


def test_relaxation_to_fixed_point(rng):
    # t = 0.5 gives kappa ~ 0.86; at t = 1 kappa ~ 0.98 and 200 rounds only reach ~1e-2
    net = chain(3)
    ch = make_tau(evolve_unitary(build_heisenberg(net, net.register_order), 0.5), E0, (2, 4))
    diag = diagnose(ch)
    assert diag.ergodic_pure
    for _ in range(20):
        rho = random_density(rng, 4)
        assert trace_distance(iterate(ch, rho, 200), diag.fixed_point) <= 1e-6


def test_iterate_against_matrix_power(chain3_tau, rng):
    rho = random_density(rng, 4)
    direct = unvec(np.linalg.matrix_power(chain3_tau.superop, 100) @ vec(rho), 4)
    np.testing.assert_allclose(iterate(chain3_tau, rho, 100), direct, atol=1e-12)
    diag = diagnose(chain3_tau)
    assert trace_distance(direct, diag.fixed_point) <= 10 * diag.kappa**100
    np.testing.assert_array_equal(iterate(chain3_tau, rho, 0), rho)
    orb = orbit(chain3_tau, rho, 3)
    assert len(orb) == 4
    np.testing.assert_allclose(orb[3], iterate(chain3_tau, rho, 3), atol=1e-15)


def test_eta_from_channel(chain3_tau, rng):
    vac = np.eye(4)[0]
    rho0 = np.outer(vac, vac)
    for L in (1, 5, 20):
        assert eta_from_channel(chain3_tau, rho0, L, vac) == pytest.approx(1, abs=1e-12)
    rho = random_density(rng, 4)
    assert eta_from_channel(chain3_tau, rho, 1, vac) == pytest.approx(rho[0, 0].real)
    with pytest.raises(ValueError):
        eta_from_channel(chain3_tau, rho, 0, vac)


def test_overlap_deficit_is_accurate():
    eps = 1e-15
    rho = np.diag([1 - eps, eps])
    assert overlap_deficit(rho, np.array([1.0, 0])) == pytest.approx(eps, rel=1e-12)
    assert overlap_deficit(np.eye(2) / 2, np.array([0.6, 0.8j])) == pytest.approx(0.5)


def test_convergence_fit_geometric():
    L = np.arange(1, 61)
    fit = convergence_fit(1 - 0.5 * 0.8**L, L)
    assert fit.rate == pytest.approx(np.log(0.8), abs=1e-6)
    assert fit.prefactor == pytest.approx(0.5, rel=1e-5)


def test_convergence_fit_with_polynomial_prefactor():
    L = np.arange(1, 121, dtype=float)
    fit = convergence_fit_deficits(L**3 * 0.8**L, L)
    assert abs(fit.rate - np.log(0.8)) <= 5e-2


def test_convergence_fit_refuses_floor():
    L = np.arange(1, 41)
    with pytest.raises(ValueError):
        convergence_fit_deficits(np.full(40, 1e-16), L)
    with pytest.raises(ValueError):
        convergence_fit_deficits(np.r_[np.full(20, 0.1), np.zeros(20)], L)
    with pytest.raises(ValueError):
        convergence_fit_deficits([0.1, 0.01], [1, 2, 3])


def test_seven_chain_rate_is_twice_log_kappa():
    # populations live in the fixed point's symmetry block, whose leading
    # non-unit eigenvalue is kappa^2 for number-conserving dynamics
    net = chain(7)
    u = evolve_unitary(build_heisenberg(net, net.register_order), 0.5)
    ch = make_tau(u, E0, (2, 64))
    diag = diagnose(ch)
    ones = np.zeros(64)
    ones[-1] = 1
    rho = np.outer(ones, ones)
    vac = np.eye(64)[0]
    deficits = [overlap_deficit(r, vac) for r in orbit(ch, rho, 199)]
    fit = convergence_fit_deficits(deficits, np.arange(1, 201))
    target = np.log(diag.kappa_fixed_block)
    assert abs(fit.rate - target) / abs(target) <= 0.1


def test_disconnected_graph_is_not_ergodic():
    net = parse_graph("n 4\ncontrol 0\nedge 0 1 1\nedge 2 3 1\n")
    u = evolve_unitary(build_heisenberg(net, net.register_order), 1.0)
    diag = diagnose(make_tau(u, E0, (2, 8)))
    assert not diag.ergodic_pure
    assert diag.n_fixed > 1


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 3.0))
def test_random_time_pair_channel_properties(t):
    ch = make_tau(pair_u(t), E0, (2, 2))
    assert ch.completeness_defect() <= 1e-10
    assert np.linalg.eigvalsh(ch.choi()).min() >= -1e-9
    diag = diagnose(ch)
    assert diag.moduli[0] == pytest.approx(1, abs=1e-9)
