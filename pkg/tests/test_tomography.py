import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vqpt.circuit import AnsatzSpec, Circuit, Gate, GateKind, build_ansatz, compile_circuit, ry
from vqpt.haar import SeededRng, haar_unitary
from vqpt.numerics import ShapeError, unitarity_residual
from vqpt.photonic import NoiseConfig
from vqpt.tomography import (
    AdamState,
    Exact,
    MeshAnsatz,
    Photonic,
    Sampled,
    TomographyConfig,
    adam_step,
    choi_matrix,
    cost,
    exact_cost,
    gradient,
    process_fidelity,
    process_fidelity_closed_form,
    run_tomography,
)

from conftest import seeded_haar

ANSATZ_D3 = build_ansatz(AnsatzSpec(2, 3))
H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def random_params(seed, n):
    return np.random.default_rng(seed).uniform(0, 2 * np.pi, n)


def central_difference(f, x, h=1e-5):
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2 * h)
    return out


# --- cost -------------------------------------------------------------------

def test_cost_zero_at_match():
    params = random_params(1, 18)
    u = compile_circuit(ANSATZ_D3, params)
    assert abs(cost(u, ANSATZ_D3, params)) < 1e-12


def test_cost_global_phase_sensitive():
    params = random_params(2, 18)
    u = -compile_circuit(ANSATZ_D3, params)
    assert cost(u, ANSATZ_D3, params) == pytest.approx(4.0, abs=1e-12)


def test_cost_matches_closed_form():
    for seed in range(5):
        u = seeded_haar(4, seed)
        params = random_params(seed, 18)
        v = compile_circuit(ANSATZ_D3, params)
        assert cost(u, ANSATZ_D3, params) == pytest.approx(exact_cost(u, v), abs=1e-12)


def test_cost_exact_vs_photonic():
    for seed in range(10):
        u = seeded_haar(4, seed, 1)
        params = random_params(seed + 100, 18)
        assert abs(cost(u, ANSATZ_D3, params) - cost(u, ANSATZ_D3, params, Photonic(), np.random.default_rng())) < 1e-10


def test_cost_shape_error():
    with pytest.raises(ShapeError):
        cost(np.eye(8), ANSATZ_D3, np.zeros(18))


def test_stochastic_backends_need_rng():
    with pytest.raises(ValueError):
        cost(np.eye(4), ANSATZ_D3, np.zeros(18), Sampled(100))
    with pytest.raises(ValueError):
        Sampled(0)


def test_sampled_cost_is_reproducible():
    u, p = seeded_haar(4, 3), random_params(3, 18)
    a = cost(u, ANSATZ_D3, p, Sampled(500), np.random.default_rng(9))
    b = cost(u, ANSATZ_D3, p, Sampled(500), np.random.default_rng(9))
    assert a == b
    assert abs(a - cost(u, ANSATZ_D3, p)) < 0.3


def test_photonic_trace_records_each_input():
    trace = []
    cost(seeded_haar(4, 3), ANSATZ_D3, random_params(3, 18), Photonic(NoiseConfig.lab_floor()),
         np.random.default_rng(0), trace)
    assert [row[0] for row in trace] == [0, 1, 2, 3]
    for _, raw, floored, normalized in trace:
        assert raw.shape == floored.shape == normalized.shape == (8,)
        assert normalized.sum() == pytest.approx(1.0)


# --- gradient ---------------------------------------------------------------

def test_gradient_zero_at_optimum():
    params = random_params(4, 18)
    u = compile_circuit(ANSATZ_D3, params)
    assert np.abs(gradient(u, ANSATZ_D3, params)).max() < 1e-9


def test_gradient_single_ry_sinusoid():
    # C(theta) = 2 (1 - cos(theta / 2)) for RY(theta) against the identity
    circ = Circuit(1, [Gate(GateKind.RY, 0, param=0)])
    for theta in np.linspace(-5, 5, 11):
        assert cost(np.eye(2), circ, [theta]) == pytest.approx(2 * (1 - math.cos(theta / 2)), abs=1e-13)
        g = gradient(np.eye(2), circ, [theta])
        assert abs(g[0] - math.sin(theta / 2)) < 1e-10


@pytest.mark.parametrize("d", [3, 6])
def test_gradient_matches_finite_differences(d):
    ansatz = build_ansatz(AnsatzSpec(2, d))
    u = seeded_haar(4, 17)
    params = random_params(17, ansatz.num_params)
    fd = central_difference(lambda p: cost(u, ansatz, p), params)
    assert np.abs(gradient(u, ansatz, params) - fd).max() < 1e-6


def test_mesh_ansatz_gradient_matches_finite_differences():
    ansatz = MeshAnsatz(2)
    u = seeded_haar(4, 18)
    params = random_params(18, ansatz.num_params)
    fd = central_difference(lambda p: cost(u, ansatz, p), params)
    assert np.abs(gradient(u, ansatz, params) - fd).max() < 1e-6


def test_gradient_workers_agree():
    u, p = seeded_haar(4, 2), random_params(2, 18)
    streams = SeededRng(3)
    rng_for = lambda i, s: streams.generator(i, s)  # noqa: E731
    a = gradient(u, ANSATZ_D3, p, Sampled(256), rng_for, workers=1)
    b = gradient(u, ANSATZ_D3, p, Sampled(256), rng_for, workers=4)
    assert np.array_equal(a, b)


# --- Adam -------------------------------------------------------------------

def test_adam_zero_gradient_is_noop():
    params = np.array([0.3, -1.2, 4.0])
    _, new = adam_step(AdamState.zeros(3), np.zeros(3), params)
    assert np.array_equal(new, params)


def test_adam_constant_gradient_step_size():
    params = np.zeros(2)
    state = AdamState.zeros(2, learning_rate=0.05)
    g = np.array([3.0, -0.01])
    for _ in range(200):
        prev = params
        state, params = adam_step(state, g, params)
    np.testing.assert_allclose(params - prev, [-0.05, 0.05], rtol=1e-5)


def test_adam_hand_trace():
    state = AdamState.zeros(2, learning_rate=0.1)
    params = np.array([1.0, -2.0])
    expected = [
        (0.900000002, -1.900000001),
        (0.8229405163085043, -1.8623651717016343),
        (0.7970111289708462, -1.8351558999782007),
    ]
    for g, want in zip(([0.5, -1.0], [0.1, 0.3], [-0.2, 0.0]), expected):
        state, params = adam_step(state, np.array(g), params)
        np.testing.assert_allclose(params, want, rtol=0, atol=1e-15)
    assert state.step == 3 and state.beta1 == 0.8 and state.beta2 == 0.999
    assert np.all(state.v >= 0)


def test_adam_length_check():
    with pytest.raises(ShapeError):
        adam_step(AdamState.zeros(2), np.zeros(3), np.zeros(3))


# --- fidelity ---------------------------------------------------------------

def test_fidelity_examples():
    u = seeded_haar(4, 1)
    assert process_fidelity(u, u) == pytest.approx(1.0, abs=1e-12)
    assert process_fidelity(u, np.exp(0.77j) * u) == pytest.approx(1.0, abs=1e-12)
    # Tr H = 0, so the Hadamard is orthogonal to the identity channel
    assert process_fidelity(np.eye(2), H) == pytest.approx(0.0, abs=1e-12)
    assert process_fidelity(np.eye(2), ry(math.pi / 2)) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ShapeError):
        process_fidelity(np.eye(2), np.eye(4))


def test_choi_is_normalised_projector():
    chi = choi_matrix(seeded_haar(4, 2))
    assert np.trace(chi).real == pytest.approx(1.0)
    np.testing.assert_allclose(chi @ chi, chi, atol=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**63 - 1), st.integers(1, 3))
def test_fidelity_properties(seed, t):
    gen = np.random.default_rng(seed)
    u, v = haar_unitary(2**t, gen), haar_unitary(2**t, gen)
    f = process_fidelity(u, v)
    assert abs(f - process_fidelity_closed_form(u, v)) < 1e-12
    assert abs(f - process_fidelity(v, u)) < 1e-12
    assert -1e-12 <= f <= 1 + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_small_cost_implies_high_fidelity(seed):
    params = random_params(seed, 18)
    u = compile_circuit(ANSATZ_D3, params)
    nudged = params + 1e-6 * np.random.default_rng(seed + 1).standard_normal(18)
    c = cost(u, ANSATZ_D3, nudged)
    assert c < 1e-9
    assert process_fidelity(u, compile_circuit(ANSATZ_D3, nudged)) > 1 - 1e-8


# --- run loop ---------------------------------------------------------------

def test_run_at_identity_is_noop():
    cfg = TomographyConfig(t=2, d=6, iterations=4, u_target=np.eye(4), initial_params=np.zeros(36))
    result = run_tomography(cfg)
    for rec in result.records:
        assert abs(rec.cost) < 1e-12
        assert rec.fidelity == pytest.approx(1.0, abs=1e-12)
    assert np.abs(result.params).max() < 1e-6


def test_run_records_contract():
    cfg = TomographyConfig(t=2, d=3, iterations=7, seed=5)
    recs = run_tomography(cfg).records
    assert [r.iteration for r in recs] == list(range(7))
    for r in recs:
        assert r.cost >= 0 and 0 <= r.fidelity <= 1 + 1e-9 and r.wall_time_s >= 0


def test_run_deterministic_exact():
    a = run_tomography(TomographyConfig(d=3, iterations=5, seed=11)).records
    b = run_tomography(TomographyConfig(d=3, iterations=5, seed=11)).records
    assert [(r.cost, r.fidelity) for r in a] == [(r.cost, r.fidelity) for r in b]


def test_run_same_target_across_backends_and_depths():
    a = run_tomography(TomographyConfig(d=3, iterations=1, seed=4, replication=2))
    b = run_tomography(TomographyConfig(d=6, iterations=1, seed=4, replication=2,
                                        backend=Sampled(64)))
    assert np.array_equal(a.u_target, b.u_target)


def test_run_photonic_noisy_deterministic_across_workers():
    backend = Photonic(NoiseConfig(phase_sigma=0.05, noisefloor_mean=0.01, noisefloor_sigma=0.001))
    cfg = TomographyConfig(d=3, iterations=2, seed=1, backend=backend)
    a = run_tomography(cfg).records
    b = run_tomography(TomographyConfig(d=3, iterations=2, seed=1, backend=backend, workers=3)).records
    assert [(r.cost, r.fidelity) for r in a] == [(r.cost, r.fidelity) for r in b]


def test_run_mesh_mode_improves():
    recs = run_tomography(TomographyConfig(iterations=15, seed=2, gradient_mode="mesh")).records
    assert recs[-1].fidelity > recs[0].fidelity


def test_run_rejects_bad_config():
    with pytest.raises(ValueError):
        TomographyConfig(iterations=0)
    with pytest.raises(ValueError):
        TomographyConfig(gradient_mode="optical")
    with pytest.raises(ValueError):
        run_tomography(TomographyConfig(initial_params=np.zeros(3)))


def test_mesh_ansatz_is_universal_size():
    ansatz = MeshAnsatz(2)
    assert ansatz.num_params == 16
    assert unitarity_residual(ansatz.unitary(random_params(0, 16))) < 1e-12
