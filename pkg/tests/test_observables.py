import math
from fractions import Fraction

import numpy as np
import pytest

from spinquench import (
    EvolutionConfig,
    ModelParams,
    SpectralDecomposition,
    StateVector,
    build_hamiltonian,
    build_initial_state,
    decompose_state,
    default_degeneracy_tol,
    density_of_states,
    entanglement_entropy,
    enumerate_sector,
    evolve_stream,
    expectation_energy,
    imbalance,
    magnetization_profile,
    participation_entropy,
    thermal_imbalance,
    time_average,
)


def test_magnetization_profile_product_state():
    basis = enumerate_sector(4, 3, 0)
    psi = build_initial_state([3, 3, -3, -3], basis)
    assert magnetization_profile(psi, basis).tolist() == [1.5, 1.5, -1.5, -1.5]


def test_magnetization_sums_to_sector():
    rng = np.random.default_rng(5)
    basis = enumerate_sector(6, 2, -2)
    amps = rng.normal(size=basis.size) + 1j * rng.normal(size=basis.size)
    psi = StateVector(amps / np.linalg.norm(amps), basis)
    assert abs(magnetization_profile(psi, basis).sum() - (-1.0)) < 1e-12


def test_imbalance_of_initial_state_is_one():
    basis = enumerate_sector(8, 3, 0)
    psi = build_initial_state([-3, -3, 3, 3, 3, 3, -3, -3], basis)
    assert imbalance(psi, psi, basis) == pytest.approx(1.0, abs=1e-15)


def test_thermal_imbalance_matches_fraction_oracle():
    cases = [
        (12, 3, -24),
        (12, 1, 0),
        (8, 3, 0),
        (8, 3, 6),
        (4, 1, 2),
        (6, 2, -4),
        (10, 1, -4),
        (5, 2, 10),
        (7, 3, 21),
        (9, 2, 6),
    ]
    for L, two_s, two_sz in cases:
        expected = float(Fraction(two_sz * two_sz, (L * two_s) ** 2))
        assert thermal_imbalance(L, two_s, two_sz) == expected
    assert thermal_imbalance(12, 3, -24) == pytest.approx(4.0 / 9.0, abs=0)
    assert thermal_imbalance(8, 3, 0) == 0.0
    assert thermal_imbalance(5, 2, 10) == 1.0


def test_entanglement_entropy_product_state_zero():
    basis = enumerate_sector(6, 1, 0)
    psi = build_initial_state([1, 1, 1, -1, -1, -1], basis)
    assert entanglement_entropy(psi, 3, basis) == pytest.approx(0.0, abs=1e-12)


def test_entanglement_entropy_bell_pair():
    basis = enumerate_sector(2, 1, 0)
    amps = np.array([1.0, 1.0]) / math.sqrt(2.0)
    psi = StateVector(amps.astype(complex), basis)
    assert entanglement_entropy(psi, 1, basis) == pytest.approx(1.0, abs=1e-12)


def test_entanglement_entropy_matches_svd_oracle():
    rng = np.random.default_rng(9)
    basis = enumerate_sector(6, 1, 0)
    amps = rng.normal(size=basis.size) + 1j * rng.normal(size=basis.size)
    amps /= np.linalg.norm(amps)
    psi = StateVector(amps, basis)
    cut = 2
    # embed into the full 2^6 product space and use a plain SVD
    full = np.zeros((2 ** cut, 2 ** (6 - cut)), dtype=complex)
    for amp, cfg in zip(amps, basis.configs):
        digits = [(1 - int(m)) // 2 for m in cfg]  # up -> 0
        row = int("".join(map(str, digits[:cut])), 2)
        col = int("".join(map(str, digits[cut:])), 2)
        full[row, col] = amp
    w = np.linalg.svd(full, compute_uv=False) ** 2
    w = w[w > 1e-14]
    expected = float(-(w * np.log2(w)).sum())
    assert entanglement_entropy(psi, cut, basis) == pytest.approx(expected, abs=1e-10)


def test_entropy_grows_then_product_state_again():
    basis, = [enumerate_sector(2, 1, 0)]
    H = build_hamiltonian(ModelParams(L=2, two_s=1, theta=0.0), basis)
    psi0 = build_initial_state([1, -1], basis)
    # at t = pi the two-site swap completes and the state is a product again
    times = np.array([0.0, math.pi / 2.0, math.pi])
    ents = [entanglement_entropy(psi, 1, basis)
            for _, psi in evolve_stream(H, psi0, EvolutionConfig(time_grid=times, method="dense"))]
    assert ents[0] == pytest.approx(0.0, abs=1e-12)
    assert ents[1] == pytest.approx(1.0, abs=1e-10)
    assert ents[2] == pytest.approx(0.0, abs=1e-10)


def test_decompose_state_consistency():
    basis = enumerate_sector(6, 1, 0)
    p = ModelParams(L=6, two_s=1, theta=0.7, h0=0.9, gamma=0.1, D=0.4)
    H = build_hamiltonian(p, basis)
    psi0 = build_initial_state([1, 1, -1, -1, 1, -1], basis)
    dec = decompose_state(H, psi0)
    weights = np.abs(dec.overlaps) ** 2
    assert weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(dec.eigenvalues) >= 0)
    # first spectral moment reproduces the expectation value
    assert (weights * dec.eigenvalues).sum() == pytest.approx(expectation_energy(H, psi0), abs=1e-10)


def test_decompose_diagonal_fast_path():
    basis = enumerate_sector(4, 3, 0)
    H = build_hamiltonian(ModelParams(L=4, two_s=3, J0=0.0, D=0.5, h0=0.2), basis)
    rng = np.random.default_rng(2)
    amps = rng.normal(size=basis.size) + 1j * rng.normal(size=basis.size)
    amps /= np.linalg.norm(amps)
    psi0 = StateVector(amps, basis)
    dec = decompose_state(H, psi0)
    d = H.diagonal()
    order = np.argsort(d, kind="stable")
    assert np.array_equal(dec.eigenvalues, d[order])
    assert np.array_equal(dec.overlaps, amps[order])


def test_participation_entropy_groups_degeneracies():
    # two exactly degenerate levels carrying half the weight each act as one
    dec = SpectralDecomposition(
        eigenvalues=np.array([0.0, 1.0, 1.0]),
        overlaps=np.array([0.0, math.sqrt(0.5), math.sqrt(0.5)], dtype=complex),
        degeneracy_tol=1e-8,
    )
    assert participation_entropy(dec) == pytest.approx(0.0, abs=1e-12)
    # uniform weight over N well-separated levels gives ln N
    n = 16
    dec = SpectralDecomposition(
        eigenvalues=np.arange(n, dtype=float),
        overlaps=np.full(n, 1.0 / math.sqrt(n), dtype=complex),
        degeneracy_tol=1e-8,
    )
    assert participation_entropy(dec) == pytest.approx(math.log(n), abs=1e-12)


def test_default_degeneracy_tol():
    assert default_degeneracy_tol(np.array([0.0, 10.0])) == pytest.approx(1e-7)
    assert default_degeneracy_tol(np.array([0.0, 0.5])) == pytest.approx(1e-8)


def test_density_of_states_normalized():
    rng = np.random.default_rng(17)
    levels = np.sort(rng.normal(size=200))
    grid, density = density_of_states(levels, sigma=0.1)
    assert grid.size == 2000
    assert grid[0] == pytest.approx(levels[0] - 0.5)
    assert grid[-1] == pytest.approx(levels[-1] + 0.5)
    area = np.trapezoid(density, grid)
    assert area == pytest.approx(1.0, abs=1e-6)


def test_density_of_states_symmetric_spectrum():
    levels = np.array([-2.0, -1.0, 1.0, 2.0])
    grid, density = density_of_states(levels, sigma=0.2)
    assert np.allclose(density, density[::-1], atol=1e-12)


def test_density_of_states_custom_grid():
    levels = np.array([0.0])
    grid = np.linspace(-1.0, 1.0, 101)
    out_grid, density = density_of_states(levels, sigma=0.1, grid=grid)
    assert np.array_equal(out_grid, grid)
    assert density.argmax() == 50


def test_time_average_window():
    times = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    values = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    # closed window keeps both endpoints
    assert time_average(times, values, (1.0, 3.0)) == pytest.approx(2.0)
    assert time_average(times, values, (4.0, 9.0)) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        time_average(times, values, (5.0, 9.0))
