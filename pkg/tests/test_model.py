import math

import numpy as np
import pytest

from decolab.fidelity import entanglement_c2
from decolab.model import (
    BathMode,
    BathModeSet,
    QubitLattice,
    build_hamiltonian,
    correlation_fn_discrete,
    decoherence_rate,
    pair_encode,
    pair_rate,
    qubit_coupling_op,
    rate_from_correlation,
    thermal_occupation_factor,
)
from decolab.operators import HilbertSpace, Ket, boson_ops, partial_trace, pauli
from decolab.states import ghz_ket, ground_ket, plus_all_ket


def test_coupling_op_axis_cases():
    lat_x = QubitLattice((0.0,), 1.0, 0.0)
    assert np.abs(qubit_coupling_op(lat_x, 0).matrix - pauli("x").matrix).max() == 0.0
    lat_y = QubitLattice((0.0,), 0.0, 1.0)
    assert np.abs(qubit_coupling_op(lat_y, 0).matrix - pauli("y").matrix).max() == 0.0


def test_coupling_op_eigenvalues_three_four():
    lat = QubitLattice((0.0,), 3.0, 4.0)
    eig = np.linalg.eigvalsh(qubit_coupling_op(lat, 0).matrix)
    assert np.abs(eig - np.array([-5.0, 5.0])).max() < 1e-12
    with pytest.raises(IndexError):
        qubit_coupling_op(lat, 1)


def test_lattice_validation():
    with pytest.raises(ValueError):
        QubitLattice((0.0, 0.0), 1.0, 0.0)
    with pytest.raises(ValueError):
        QubitLattice((1.0, 0.0), 1.0, 0.0)
    with pytest.raises(ValueError):
        QubitLattice((0.0,), 1.0, 0.0, (1.0, 2.0))


def test_mode_set_symmetry_enforced():
    with pytest.raises(ValueError):
        BathModeSet((BathMode(1.0, 1.0, 0.1),), 0.0)
    ok = BathModeSet.symmetric([(1.0, 1.0, 0.1)], 0.0)
    assert ok.n_modes == 2
    with pytest.raises(ValueError):
        BathModeSet((BathMode(0.0, -1.0, 0.1),), 0.0)


def test_build_single_qubit_single_mode_structure():
    g, n_max = 0.07, 3
    lat = QubitLattice((0.0,), 1.0, 0.5)
    modes = BathModeSet((BathMode(0.0, 1.0, g),), 0.0)
    model = build_hamiltonian(lat, modes, n_max)
    a, adag, _ = boson_ops(n_max)
    expected = np.kron(lat.coupling_matrix(), g * (a.matrix + adag.matrix))
    assert np.abs(model.h_i.matrix - expected).max() < 1e-14


def test_build_hermiticity_with_symmetric_pair():
    lat = QubitLattice((0.4,), 1.0, 0.3)
    modes = BathModeSet.symmetric([(1.7, 1.2, 0.05)], 0.5)
    model = build_hamiltonian(lat, modes, 3)
    for part in (model.h0, model.h_i, model.h_env):
        assert np.abs(part.matrix - part.matrix.conj().T).max() < 1e-12


def test_decoupled_spectrum_is_sum_of_parts():
    # with g = 0 the total spectrum is every qubit energy plus every mode energy
    lat = QubitLattice((0.0, 1.0), 0.0, 0.0, (0.9, 1.7))
    modes = BathModeSet.symmetric([(1.1, 1.3, 0.0)], 0.0)
    n_max = 2
    model = build_hamiltonian(lat, modes, n_max)
    got = np.sort(np.linalg.eigvalsh(model.total().matrix))
    qubit_e = np.sort(np.linalg.eigvalsh((model.h0.matrix)[:: (n_max + 1) ** 2, :: (n_max + 1) ** 2]))
    # brute-force oracle: enumerate qubit levels x mode occupations
    levels = []
    for s0 in (0.45, -0.45):
        for s1 in (0.85, -0.85):
            for n0 in range(n_max + 1):
                for n1 in range(n_max + 1):
                    levels.append(s0 + s1 + 1.3 * (n0 + n1))
    assert np.abs(got - np.sort(levels)).max() < 1e-10
    assert len(qubit_e) == 4


def test_correlation_at_zero_is_normalization():
    modes = BathModeSet.symmetric([(1.0, 1.0, 0.1), (2.0, 1.5, 0.07)], 0.8)
    x = correlation_fn_discrete(modes, 0.0)
    direct = 2 * sum(m.g ** 2 * thermal_occupation_factor(m.omega, 0.8) for m in modes.modes)
    assert abs(x - direct) < 1e-15
    assert x == correlation_fn_discrete(modes, -0.0)


def test_correlation_single_pair_cosine():
    k, g = 1.3, 0.1
    modes = BathModeSet.symmetric([(k, 1.0, g)], 0.0)
    for d in (0.0, 0.4, 1.1, -1.1):
        assert abs(correlation_fn_discrete(modes, d) - 4 * g * g * math.cos(k * d)) < 1e-15

    assert correlation_fn_discrete(modes, 0.7) == correlation_fn_discrete(modes, -0.7)


def test_correlation_high_temperature_limit():
    omega, g = 1.0, 0.1
    temperature = omega / (4e-4)  # omega / 2T = 2e-4
    modes = BathModeSet((BathMode(0.0, omega, g),), temperature)
    got = correlation_fn_discrete(modes, 0.0)
    series = 2 * g * g * (2 * temperature / omega)  # leading coth term
    assert abs(got - series) / series < 1e-6


def test_decoherence_rate_single_qubit_vacuum():
    g = 0.05
    lat = QubitLattice((0.0,), 1.0, 0.0)
    modes = BathModeSet((BathMode(0.0, 1.0, g),), 0.0)
    rho = ground_ket(1).projector()
    rate = decoherence_rate(lat, modes, rho)
    # Omega^2(0) = 2 g^2 and <(dA)^2> = 1; the half makes this the variance form
    assert abs(rate - g * g) < 1e-15
    model = build_hamiltonian(lat, modes, 3)
    ent = entanglement_c2(rho, model.h_i, model.thermal_env_state()).c2
    assert abs(rate - ent) < 1e-14


def test_rate_vanishes_for_coupling_eigenstates():
    lat = QubitLattice((0.0, 1.0), 1.0, 0.5)
    modes = BathModeSet.symmetric([(0.8, 1.0, 0.1)], 0.3)
    minus, plus = lat.coupling_eigenstates()
    state = Ket(HilbertSpace((2, 2)), np.kron(plus, minus))
    assert decoherence_rate(lat, modes, state.projector()) < 1e-14


def test_far_separated_qubits_decohere_additively():
    # Gaussian-weighted comb, wide in k and densely sampled, so the
    # correlation is delta-like over the qubit spacing (no comb aliases)
    ks = np.linspace(3.1, 7.9, 96)
    weights = np.exp(-((ks - 5.5) ** 2) / (2 * 0.4 ** 2))
    pairs = [(k, 1.0 + 0.1 * k, 0.02 * math.sqrt(w)) for k, w in zip(ks, weights)]
    modes = BathModeSet.symmetric(pairs, 0.0)
    assert abs(correlation_fn_discrete(modes, 60.0) / correlation_fn_discrete(modes, 0.0)) < 1e-9
    lat = QubitLattice((0.0, 60.0), 1.0, 0.0, (1.0, 1.0))
    rho = ghz_ket(2).projector()
    rate = decoherence_rate(lat, modes, rho)
    singles = 0.0
    for l, pos in enumerate(lat.positions):
        single = QubitLattice((pos,), 1.0, 0.0)
        marginal = partial_trace(rho, keep={l})
        singles += decoherence_rate(single, modes, marginal)
    assert abs(rate - singles) / singles < 1e-8


def test_delta_correlated_rate_is_additive_exactly():
    x = 0.37
    delta = lambda d: x if d == 0.0 else 0.0
    lat = QubitLattice((0.0, 0.5, 1.7), 1.0, 0.4)
    rho = ghz_ket(3).projector()
    total = rate_from_correlation(lat, delta, rho)
    singles = 0.0
    for l, pos in enumerate(lat.positions):
        single = QubitLattice((pos,), 1.0, 0.4)
        singles += rate_from_correlation(single, delta, partial_trace(rho, keep={l}))
    assert abs(total - singles) < 1e-12


def test_rate_translation_invariance():
    modes = BathModeSet.symmetric([(0.9, 1.0, 0.08)], 0.5)
    rho = plus_all_ket(2).projector()
    base = decoherence_rate(QubitLattice((0.0, 0.8), 1.0, 0.2), modes, rho)
    moved = decoherence_rate(QubitLattice((13.4, 14.2), 1.0, 0.2), modes, rho)
    assert abs(base - moved) < 1e-12 * max(base, 1.0)


def test_factorization_identity_across_models():
    cases = [
        (QubitLattice((0.0,), 1.0, 0.5, (1.0,)), BathModeSet((BathMode(0.0, 1.0, 0.05),), 2.0)),
        (QubitLattice((0.0, 0.7), 1.0, 0.5, (1.0, 0.8)), BathModeSet.symmetric([(1.3, 1.1, 0.04)], 0.5)),
        (QubitLattice((0.0, 0.7), 0.3, 0.9), BathModeSet.symmetric([(0.9, 1.0, 0.04), (1.6, 1.2, 0.03)], 0.0)),
    ]
    from decolab.operators import n_max_for_tail

    for lattice, modes in cases:
        n_max = max(n_max_for_tail(m.omega, modes.temperature) for m in modes.modes)
        model = build_hamiltonian(lattice, modes, n_max)
        env = model.thermal_env_state()
        for rho in (ground_ket(lattice.n_qubits).projector(),
                    ghz_ket(lattice.n_qubits).projector() if lattice.n_qubits > 1 else plus_all_ket(1).projector()):
            rate = decoherence_rate(lattice, modes, rho)
            vf = entanglement_c2(rho, model.h_i, env).c2
            assert abs(rate - vf) / max(vf, 1e-14) < 1e-6


def encoded_lattice():
    return QubitLattice((0.0, 0.2, 2.0, 2.2), 1.0, 0.5)


def test_pair_encode_annihilated_by_pair_sums():
    lat = encoded_lattice()
    logical = plus_all_ket(2)
    out = pair_encode(logical, lat)
    for a, b in ((0, 1), (2, 3)):
        s = qubit_coupling_op(lat, a).matrix + qubit_coupling_op(lat, b).matrix
        assert np.abs(s @ out.amplitudes).max() < 1e-12


def test_pair_encode_basis_rule():
    lat = QubitLattice((0.0, 0.3), 1.0, 0.5)
    minus, plus = lat.coupling_eigenstates()
    out = pair_encode(Ket(HilbertSpace((2,)), minus), lat)
    assert np.abs(out.amplitudes - np.kron(minus, plus)).max() < 1e-12
    sup = Ket(HilbertSpace((2,)), (minus + plus) / math.sqrt(2))
    out2 = pair_encode(sup, lat)
    expected = (np.kron(minus, plus) + np.kron(plus, minus)) / math.sqrt(2)
    assert np.abs(out2.amplitudes - expected).max() < 1e-12


def test_pair_encode_ghz_logical():
    lat = encoded_lattice()
    out = pair_encode(ghz_ket(2), lat)
    for a, b in ((0, 1), (2, 3)):
        s = qubit_coupling_op(lat, a).matrix + qubit_coupling_op(lat, b).matrix
        assert np.abs(s @ out.amplitudes).max() < 1e-12


def test_pair_encode_needs_even_lattice():
    with pytest.raises(ValueError):
        pair_encode(ground_ket(1), QubitLattice((0.0, 1.0, 2.0), 1.0, 0.0))


def test_pair_rate_zero_for_encoded_states():
    lat = encoded_lattice()
    modes = BathModeSet.symmetric([(0.01, 1.0, 0.1)], 0.7)
    out = pair_encode(ghz_ket(2), lat)
    assert pair_rate(lat, modes, out.projector()) < 1e-12
    assert pair_rate(lat, modes, out.projector(), omega2=lambda d: 0.4) < 1e-12


def test_pair_rate_positive_for_naive_superposition():
    lat = QubitLattice((0.0, 0.2), 1.0, 0.5)
    minus, plus = lat.coupling_eigenstates()
    naive = Ket(HilbertSpace((2, 2)), (np.kron(plus, plus) + np.kron(minus, minus)) / math.sqrt(2))
    modes = BathModeSet.symmetric([(0.01, 1.0, 0.1)], 0.0)
    rate = pair_rate(lat, modes, naive.projector())
    x = correlation_fn_discrete(modes, 0.0)
    a2 = lat.coupling_norm ** 2
    assert abs(rate - 2 * x * a2) / (2 * x * a2) < 1e-12


def test_pair_rate_scaling_with_carrier():
    d = 1.0
    lat = QubitLattice((0.0, d), 1.0, 0.0)
    rates = {}
    for kd in (0.01, 0.02, 0.04):
        modes = BathModeSet.symmetric([(kd / d, 1.0, 0.05)], 0.0)
        state = pair_encode(ground_ket(1), lat)
        rates[kd] = decoherence_rate(lat, modes, state.projector())
    assert abs(rates[0.02] / rates[0.01] - 4.0) < 0.4
    assert abs(rates[0.04] / rates[0.01] - 16.0) < 1.6


def test_pair_rate_warns_outside_constant_regime():
    lat = QubitLattice((0.0, 1.5), 1.0, 0.0)
    modes = BathModeSet.symmetric([(1.0, 1.0, 0.1)], 0.0)  # k * d_intra = 1.5: far from constant
    minus, plus = lat.coupling_eigenstates()
    naive = Ket(HilbertSpace((2, 2)), (np.kron(plus, plus) + np.kron(minus, minus)) / math.sqrt(2))
    with pytest.warns(UserWarning, match="pair-constant"):
        pair_rate(lat, modes, naive.projector())
