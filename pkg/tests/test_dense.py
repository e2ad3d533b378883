"""Dense density-matrix oracle, checked against state-vector evolution."""

import math

import numpy as np
import pytest

from logacc.circuits import build_iqp, build_trotter
from logacc.dense import (
    DenseState,
    circuit_unitary,
    evolve_circuit,
    exact_fidelity,
    exact_output_distribution,
    exact_renyi2_density,
    exact_tvd,
    total_error_rate,
)
from logacc.noise import CircuitChannels, depolarizing
from logacc.pauli import PauliString


def test_noiseless_iqp_matches_statevector_amplitudes():
    circuit = build_iqp(2, 3, np.random.default_rng(4))
    u = circuit_unitary(circuit)
    amps = u[:, 0]
    expected = np.abs(amps) ** 2
    got = exact_output_distribution(circuit)
    assert np.allclose(got, expected, atol=1e-10)


def test_noiseless_trotter_matches_statevector():
    ham = [(0.9, PauliString.from_label("XY")), (0.4, PauliString.from_label("ZZ"))]
    circuit = build_trotter(ham, t=0.8, steps=2)
    u = circuit_unitary(circuit)
    expected = np.abs(u[:, 0]) ** 2
    assert np.allclose(exact_output_distribution(circuit), expected, atol=1e-10)


def test_fully_depolarized_register_is_uniform():
    circuit = build_iqp(3, 2, np.random.default_rng(0))
    per_layer = [() for _ in circuit.layers]
    # rate 3/4 is the completely mixing point: weight 1/4 on each of I,X,Y,Z
    meas = tuple(depolarizing(0.75, (q,)) for q in range(3))
    chans = CircuitChannels(3, (), tuple(per_layer), meas)
    dist = exact_output_distribution(circuit, chans)
    assert np.allclose(dist, np.full(8, 1 / 8), atol=1e-10)


def test_metric_trivial_values():
    a = np.array([1.0, 0.0])
    assert exact_tvd(a, a) == 0.0
    assert exact_tvd(a, np.array([0.0, 1.0])) == 1.0
    zero = DenseState.zero_state(1)
    one = DenseState(1, np.diag([0.0, 1.0]).astype(complex))
    assert math.isclose(exact_fidelity(zero, zero), 1.0)
    assert math.isclose(exact_fidelity(zero, one), 0.0, abs_tol=1e-12)


def test_renyi2_density_of_maximally_mixed_qubit():
    mixed = DenseState(1, np.eye(2, dtype=complex) / 2)
    assert math.isclose(exact_renyi2_density(mixed, 1), 1.0)


def test_fidelity_mixed_states_general_formula():
    rng = np.random.default_rng(3)
    # two random 1-qubit mixed states vs closed form for commuting diagonals
    a = np.diag([0.7, 0.3]).astype(complex)
    b = np.diag([0.4, 0.6]).astype(complex)
    want = (math.sqrt(0.7 * 0.4) + math.sqrt(0.3 * 0.6)) ** 2
    assert math.isclose(exact_fidelity(a, b), want, rel_tol=1e-9)


def test_total_error_rate_closed_forms():
    circuit = build_iqp(2, 1, np.random.default_rng(1))
    empty = CircuitChannels.noiseless(circuit)
    assert total_error_rate(empty) == 0.0
    two = CircuitChannels(
        2, (depolarizing(0.1, (0,)), depolarizing(0.1, (1,))), tuple(() for _ in circuit.layers), ()
    )
    assert math.isclose(total_error_rate(two), 0.19)
    many = CircuitChannels(
        2,
        tuple(depolarizing(1e-3, (0,)) for _ in range(600)),
        tuple(() for _ in circuit.layers),
        (),
    )
    assert math.isclose(total_error_rate(many), 1 - 0.999**600, rel_tol=1e-12)
    assert abs(total_error_rate(many) - 0.4513) < 5e-4


def test_dense_state_validation():
    with pytest.raises(ValueError):
        DenseState(1, np.diag([0.9, 0.2]).astype(complex))
    with pytest.raises(ValueError):
        DenseState(7, np.eye(2**7, dtype=complex) / 2**7)
