import math

import numpy as np
import pytest

from vqpt.circuit import AnsatzSpec, build_ansatz, build_tomography_unitary, compile_circuit
from vqpt.clements import MeshProgram, UnitCell, decompose, reconstruct, strip_output_phases
from vqpt.photonic import (
    DegenerateSignalError,
    IntensityDistribution,
    NoiseConfig,
    OneHotIndex,
    ancilla_zero_probability,
    encode,
    estimate_noisefloor,
    process_raw,
    scatter_raw,
)
from vqpt.numerics import DomainError, ShapeError

from conftest import seeded_haar


def classical_fidelity(p, q):
    return float(np.sum(np.sqrt(p * q)) ** 2)


def test_encode():
    assert encode(3, "000").j == 0
    assert encode(3, "010").j == 2
    assert encode(3, "110").j == 6
    assert [encode(3, s).j for s in ("000", "010", "100", "110")] == [0, 2, 4, 6]
    assert OneHotIndex(3, 5).label == "101"
    with pytest.raises(DomainError):
        encode(3, "01")
    with pytest.raises(DomainError):
        encode(2, "0a")


def test_scatter_identity():
    mesh = decompose(np.eye(8))
    np.testing.assert_allclose(scatter_raw(mesh, OneHotIndex(3, 0)), np.eye(8)[0], atol=1e-15)


def test_scatter_balanced_cell():
    mesh = MeshProgram(2, (UnitCell(0, math.pi / 2, 0.0),), np.ones(2))
    np.testing.assert_allclose(scatter_raw(mesh, OneHotIndex(1, 0)), [0.5, 0.5], atol=1e-15)


def test_scatter_matches_column():
    u = seeded_haar(8, 3)
    mesh = decompose(u)
    for j in range(8):
        np.testing.assert_allclose(scatter_raw(mesh, OneHotIndex(3, j)), np.abs(u[:, j]) ** 2, atol=1e-12)


def test_scatter_shape_and_rng_checks():
    mesh = decompose(np.eye(4))
    with pytest.raises(ShapeError):
        scatter_raw(mesh, OneHotIndex(3, 0))
    with pytest.raises(ValueError):
        scatter_raw(mesh, OneHotIndex(2, 0), NoiseConfig(phase_sigma=0.1))


def test_one_hot_equivalence_for_circuit_unitary(rng):
    circ = build_ansatz(AnsatzSpec(2, 3))
    w = build_tomography_unitary(seeded_haar(4, 8), compile_circuit(circ, rng.uniform(0, 6, 18)))
    mesh = strip_output_phases(decompose(w))
    for j in range(8):
        dist = np.abs(w[:, j]) ** 2
        np.testing.assert_allclose(scatter_raw(mesh, OneHotIndex(3, j)), dist, atol=1e-12)


def test_process_raw_degenerate():
    floor = np.full(8, 0.3)
    with pytest.raises(DegenerateSignalError):
        process_raw(floor.copy(), floor)


def test_process_raw_constant_floor():
    floor = np.full(8, 0.07)
    raw = np.array([2, 1, 1, 0, 0, 0, 0, 0]) + floor
    np.testing.assert_allclose(process_raw(raw, floor).probabilities, [0.5, 0.25, 0.25, 0, 0, 0, 0, 0], atol=1e-15)


def test_process_raw_clamps_and_checks():
    dist = process_raw([1.0, 0.0, 0.5, 0.2], [0.1, 0.1, 0.1, 0.1])
    assert np.all(dist.probabilities >= 0)
    assert dist.probabilities[1] == 0
    with pytest.raises(ShapeError):
        process_raw([1.0, 2.0], [0.0])


def test_floor_recovery_monte_carlo():
    noise = NoiseConfig.lab_floor()
    u = seeded_haar(8, 12)
    mesh = decompose(u)
    clean = np.abs(u[:, 0]) ** 2
    gen = np.random.default_rng(77)
    floor = estimate_noisefloor(noise, 8, gen)
    assert np.abs(floor - noise.noisefloor_mean).max() < 5 * noise.noisefloor_sigma / math.sqrt(380)
    # per-reading spread of the floor bounds the error of every entry
    bound = 6 * noise.noisefloor_sigma * (1 + math.sqrt(8))
    for _ in range(200):
        dist = process_raw(scatter_raw(mesh, OneHotIndex(3, 0), noise, gen), floor)
        assert np.abs(dist.probabilities - clean).max() < bound


def test_ancilla_zero_probability():
    assert ancilla_zero_probability(IntensityDistribution(np.full(8, 1 / 8)), 3) == pytest.approx(0.5)
    assert ancilla_zero_probability(IntensityDistribution(np.eye(8)[1]), 3) == 0
    with pytest.raises(ShapeError):
        ancilla_zero_probability(np.full(4, 0.25), 3)


def test_ancilla_probability_matches_statevector(rng):
    circ = build_ansatz(AnsatzSpec(2, 6))
    w = build_tomography_unitary(seeded_haar(4, 4), compile_circuit(circ, rng.uniform(0, 6, 36)))
    mesh = strip_output_phases(decompose(w))
    for j in (0, 2, 4, 6):
        dist = process_raw(scatter_raw(mesh, OneHotIndex(3, j)), np.zeros(8))
        assert abs(ancilla_zero_probability(dist, 3) - np.sum(np.abs(w[0::2, j]) ** 2)) < 1e-12


def test_phase_noise_conserves_energy():
    mesh = decompose(seeded_haar(8, 6))
    gen = np.random.default_rng(1)
    totals = [scatter_raw(mesh, OneHotIndex(3, 0), NoiseConfig(phase_sigma=0.3), gen).sum() for _ in range(100)]
    np.testing.assert_allclose(totals, 1.0, atol=1e-12)


def test_phase_noise_changes_output():
    mesh = decompose(seeded_haar(8, 6))
    gen = np.random.default_rng(1)
    noisy = scatter_raw(mesh, OneHotIndex(3, 0), NoiseConfig(phase_sigma=0.2), gen)
    assert np.abs(noisy - scatter_raw(mesh, OneHotIndex(3, 0))).max() > 1e-4


def test_intensity_noise_nonnegative():
    mesh = decompose(seeded_haar(8, 6))
    gen = np.random.default_rng(2)
    for _ in range(50):
        raw = scatter_raw(mesh, OneHotIndex(3, 3), NoiseConfig(intensity_noise_sigma=2.0), gen)
        assert np.all(raw >= 0)


def test_invariant_under_strip():
    mesh = decompose(seeded_haar(8, 21))
    assert np.abs(reconstruct(mesh) - reconstruct(strip_output_phases(mesh))).max() > 1e-3
    for j in range(8):
        a = scatter_raw(mesh, OneHotIndex(3, j))
        b = scatter_raw(strip_output_phases(mesh), OneHotIndex(3, j))
        assert np.abs(a - b).max() < 1e-14


def test_fidelity_degrades_with_phase_noise():
    mesh = decompose(seeded_haar(8, 30))
    clean = np.abs(reconstruct(mesh)[:, 0]) ** 2
    means = []
    for sigma in (0.0, 0.05, 0.2):
        gen = np.random.default_rng(5)
        noise = NoiseConfig(phase_sigma=sigma)
        f = [classical_fidelity(process_raw(scatter_raw(mesh, OneHotIndex(3, 0), noise, gen), np.zeros(8)).probabilities, clean)
             for _ in range(200)]
        means.append(np.mean(f))
    assert means[0] == pytest.approx(1.0, abs=1e-12)
    assert means[0] >= means[1] >= means[2]


def test_noise_config_validation():
    assert NoiseConfig().noiseless
    assert not NoiseConfig.lab_floor().noiseless
    with pytest.raises(ValueError):
        NoiseConfig(phase_sigma=-1)
