import numpy as np
import pytest

from swapcool.network import chain
from swapcool.states import LABELS, haar_states, load_amplitudes, named_state, resolve_state, to_register_order


def test_named_states():
    net = chain(3)
    for label in LABELS:
        s = named_state(label, net)
        if s.ndim == 1:
            assert np.linalg.norm(s) == pytest.approx(1)
        else:
            assert np.trace(s) == pytest.approx(1)
    assert named_state("all_ones", net)[-1] == 1
    w = named_state("w", net)
    assert np.flatnonzero(w).tolist() == [1, 2, 4]
    with pytest.raises(ValueError):
        named_state("thermal", net)


def test_register_order_permutation(tmp_path):
    net = chain(3, controlled=(2,))
    # site-order state |100>: excitation on site 0
    psi = np.zeros(8)
    psi[0b100] = 1
    reg = to_register_order(psi, net)
    # register order is (2, 0, 1), so site 0 sits in the middle qubit
    assert np.flatnonzero(reg).tolist() == [0b010]
    rho = to_register_order(np.outer(psi, psi), net)
    assert rho[0b010, 0b010] == 1
    f = tmp_path / "amp.txt"
    np.savetxt(f, np.c_[psi * 2, np.zeros(8)])
    np.testing.assert_allclose(load_amplitudes(f, net), reg)
    np.testing.assert_allclose(resolve_state(f"@{f}", net), reg)


def test_amplitude_file_errors(tmp_path):
    net = chain(3)
    f = tmp_path / "bad.txt"
    np.savetxt(f, np.ones(4))
    with pytest.raises(ValueError):
        load_amplitudes(f, net)
    np.savetxt(f, np.zeros(8))
    with pytest.raises(ValueError):
        load_amplitudes(f, net)
    np.savetxt(f, np.ones((8, 3)))
    with pytest.raises(ValueError):
        load_amplitudes(f, net)


def test_haar_states_are_seeded():
    a = haar_states(np.random.default_rng(4), 4, 5)
    b = haar_states(np.random.default_rng(4), 4, 5)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(np.linalg.norm(a, axis=1), 1)
