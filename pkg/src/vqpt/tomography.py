"""Variational process tomography: cost backends, four-term shift gradients,
Adam, process fidelity and the iterative optimisation loop."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence, Union

import numpy as np

from .circuit import AnsatzSpec, Circuit, build_ansatz, build_tomography_unitary
from .clements import absorb_input_permutation, decompose, mesh_unitary, strip_output_phases
from .haar import SeededRng, haar_unitary
from .numerics import ShapeError
from .photonic import (
    FLOOR_SAMPLES,
    NoiseConfig,
    OneHotIndex,
    ancilla_zero_probability,
    estimate_noisefloor,
    process_raw,
    scatter_raw,
    subtract_floor,
)

SHIFT_NEAR = math.pi / 2
SHIFT_FAR = 3 * math.pi / 2
COEF_NEAR = (math.sqrt(2) + 1) / (4 * math.sqrt(2))
COEF_FAR = (math.sqrt(2) - 1) / (4 * math.sqrt(2))
# (shift, weight) pairs; index in this tuple is the "shift index" of RNG keys
SHIFTS = ((SHIFT_NEAR, COEF_NEAR), (-SHIFT_NEAR, -COEF_NEAR),
          (SHIFT_FAR, -COEF_FAR), (-SHIFT_FAR, COEF_FAR))

BETA1 = 0.8
BETA2 = 0.999
ADAM_EPS = 1e-8
DEFAULT_LEARNING_RATE = 0.1


# --- backends ---------------------------------------------------------------

@dataclass(frozen=True)
class Exact:
    name = "exact"


@dataclass(frozen=True)
class Sampled:
    shots: int = 8194
    name = "sampled"

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")


@dataclass(frozen=True)
class Photonic:
    """One-hot scattering backend.

    ``floor_estimate`` is the averaged dark reading subtracted from every
    measurement; when ``None`` and the noise config has a floor, a fresh
    estimate is drawn from the evaluation's rng.
    """

    noise: NoiseConfig = field(default_factory=NoiseConfig)
    floor_estimate: np.ndarray | None = field(default=None, compare=False, repr=False)
    name = "photonic"


Backend = Union[Exact, Sampled, Photonic]


def target_inputs(t: int) -> list[int]:
    """Column/mode indices of ``|i>|0>_ancilla`` for every target basis state ``i``."""
    return [2 * i for i in range(2**t)]


def ancilla_probabilities(w: np.ndarray, t: int, backend: Backend,
                          rng: np.random.Generator | None = None,
                          trace: list | None = None) -> np.ndarray:
    """P(ancilla = 0) for each target basis input of the tomography unitary ``w``."""
    inputs = target_inputs(t)
    if isinstance(backend, Exact):
        return np.array([np.clip(np.sum(np.abs(w[0::2, j]) ** 2), 0.0, 1.0) for j in inputs])
    if rng is None:
        raise ValueError(f"{backend.name} backend needs an rng")
    if isinstance(backend, Sampled):
        out = []
        for j in inputs:
            p = np.abs(w[:, j]) ** 2
            counts = rng.multinomial(backend.shots, p / p.sum())
            out.append(counts[0::2].sum() / backend.shots)
        return np.array(out)
    if isinstance(backend, Photonic):
        n = t + 1
        floor = backend.floor_estimate
        if floor is None:
            floor = estimate_noisefloor(backend.noise, 2**n, rng, FLOOR_SAMPLES)
        out = []
        for i, j in enumerate(inputs):
            mesh = strip_output_phases(decompose(absorb_input_permutation(w, j)))
            raw = scatter_raw(mesh, OneHotIndex(n, 0), backend.noise, rng)
            dist = process_raw(raw, floor)
            out.append(ancilla_zero_probability(dist, n))
            if trace is not None:
                trace.append((i, raw, subtract_floor(raw, floor), dist.probabilities))
        return np.array(out)
    raise TypeError(f"unknown backend {backend!r}")


# --- ansatz -----------------------------------------------------------------

@dataclass(frozen=True)
class MeshAnsatz:
    """Ansatz parameterised directly by optical mesh settings.

    ``params = [theta_0, phi_0, ..., theta_{K-1}, phi_{K-1}, alpha_0, ..., alpha_{m-1}]``
    with output phases ``exp(i alpha_k)``; ``m^2`` parameters in total, which
    covers all of U(m).
    """

    n_qubits: int

    @property
    def m(self) -> int:
        return 2**self.n_qubits

    @property
    def modes(self) -> np.ndarray:
        return decompose(np.eye(self.m)).modes

    @property
    def num_params(self) -> int:
        return self.m**2

    def unitary(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if params.size != self.num_params:
            raise ValueError(f"mesh ansatz takes {self.num_params} parameters, got {params.size}")
        k = self.m * (self.m - 1) // 2
        cells = params[:2 * k]
        return mesh_unitary(self.m, self.modes, cells[0::2], cells[1::2],
                            np.exp(1j * params[2 * k:]))


Ansatz = Union[Circuit, MeshAnsatz]


def _check_shapes(u_target, ansatz):
    u_target = np.asarray(u_target, dtype=np.complex128)
    if u_target.shape != (2**ansatz.n_qubits,) * 2:
        raise ShapeError(f"target {u_target.shape} does not match a {ansatz.n_qubits}-qubit ansatz")
    return u_target


# --- cost and gradient --------------------------------------------------------

def cost_from_probabilities(p0: np.ndarray, t: int) -> float:
    """``(1/2^(t-1)) * sum_i [1 - Re<tr_i|pr_i>]`` with ``Re = 2 P_i - 1``."""
    re = 2 * np.asarray(p0) - 1
    return float(np.sum(1 - re) / 2 ** (t - 1))


def exact_cost(u_target, u_vqc) -> float:
    """Closed form ``(2^t - Re Tr(U^dag V)) / 2^(t-1)`` used as an oracle."""
    u_target = np.asarray(u_target)
    dim = u_target.shape[0]
    t = dim.bit_length() - 1
    return float((dim - np.trace(u_target.conj().T @ u_vqc).real) / 2 ** (t - 1))


def cost(u_target, ansatz: Ansatz, params, backend: Backend = Exact(),
         rng: np.random.Generator | None = None, trace: list | None = None) -> float:
    u_target = _check_shapes(u_target, ansatz)
    t = ansatz.n_qubits
    w = build_tomography_unitary(u_target, ansatz.unitary(params))
    return cost_from_probabilities(ancilla_probabilities(w, t, backend, rng, trace), t)


RngFactory = Callable[[int, int], np.random.Generator]


def gradient(u_target, ansatz: Ansatz, params, backend: Backend = Exact(),
             rng_for: RngFactory | None = None, workers: int = 1) -> np.ndarray:
    """Four-term shift rule, four cost evaluations per parameter.

    ``rng_for(param_index, shift_index)`` supplies the evaluation streams for
    stochastic backends, so the result does not depend on ``workers``.
    """
    params = np.asarray(params, dtype=float)
    u_target = _check_shapes(u_target, ansatz)
    tasks = [(i, s) for i in range(params.size) for s in range(len(SHIFTS))]

    def evaluate(task):
        i, s = task
        shifted = params.copy()
        shifted[i] += SHIFTS[s][0]
        rng = rng_for(i, s) if rng_for is not None else None
        return cost(u_target, ansatz, shifted, backend, rng)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(evaluate, tasks))
    else:
        values = [evaluate(task) for task in tasks]
    weights = np.array([SHIFTS[s][1] for _, s in tasks])
    return (np.array(values) * weights).reshape(params.size, len(SHIFTS)).sum(axis=1)


# --- Adam ---------------------------------------------------------------------

@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    learning_rate: float = DEFAULT_LEARNING_RATE
    beta1: float = BETA1
    beta2: float = BETA2
    eps: float = ADAM_EPS

    @classmethod
    def zeros(cls, n: int, learning_rate: float = DEFAULT_LEARNING_RATE, **kw) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0, learning_rate, **kw)


def adam_step(state: AdamState, grad, params) -> tuple[AdamState, np.ndarray]:
    grad = np.asarray(grad, dtype=float)
    params = np.asarray(params, dtype=float)
    if not grad.shape == params.shape == state.m.shape:
        raise ShapeError("gradient, parameters and Adam moments must have equal length")
    step = state.step + 1
    m = state.beta1 * state.m + (1 - state.beta1) * grad
    v = state.beta2 * state.v + (1 - state.beta2) * grad**2
    m_hat = m / (1 - state.beta1**step)
    v_hat = v / (1 - state.beta2**step)
    new_params = params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return replace(state, m=m, v=v, step=step), new_params


# --- fidelity -----------------------------------------------------------------

def choi_matrix(u) -> np.ndarray:
    """Normalised Choi/chi operator ``vec(U) vec(U)^dag / D`` of a unitary channel."""
    u = np.asarray(u, dtype=np.complex128)
    vec = u.reshape(-1, order="F")
    return np.outer(vec, vec.conj()) / u.shape[0]


def process_fidelity(u_ideal, u_actual) -> float:
    u_ideal = np.asarray(u_ideal)
    u_actual = np.asarray(u_actual)
    if u_ideal.shape != u_actual.shape:
        raise ShapeError(f"dimension mismatch {u_ideal.shape} vs {u_actual.shape}")
    return float(np.trace(choi_matrix(u_actual) @ choi_matrix(u_ideal)).real)


def process_fidelity_closed_form(u_ideal, u_actual) -> float:
    d = np.asarray(u_ideal).shape[0]
    return float(abs(np.trace(np.asarray(u_ideal).conj().T @ u_actual)) ** 2 / d**2)


# --- run loop -----------------------------------------------------------------

@dataclass(frozen=True)
class RunRecord:
    iteration: int
    cost: float
    fidelity: float
    wall_time_s: float


# spawn-key tags for the streams of one (seed, replication)
_TARGET, _INIT, _FLOOR, _GRAD, _RECORD = range(5)


@dataclass(frozen=True)
class TomographyConfig:
    t: int = 2
    d: int = 3
    seed: int = 0
    replication: int = 0
    iterations: int = 10
    learning_rate: float = DEFAULT_LEARNING_RATE
    backend: Backend = field(default_factory=Exact)
    gradient_mode: str = "gate"
    entangler: str = "alternating"
    workers: int = 1
    u_target: np.ndarray | None = field(default=None, compare=False, repr=False)
    initial_params: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.gradient_mode not in ("gate", "mesh"):
            raise ValueError(f"unknown gradient_mode {self.gradient_mode!r}")

    @property
    def rng(self) -> SeededRng:
        return SeededRng(self.seed, self.replication)

    def make_ansatz(self) -> Ansatz:
        if self.gradient_mode == "mesh":
            return MeshAnsatz(self.t)
        return build_ansatz(AnsatzSpec(self.t, self.d, self.entangler))

    def make_target(self) -> np.ndarray:
        if self.u_target is not None:
            return np.asarray(self.u_target, dtype=np.complex128)
        return haar_unitary(2**self.t, self.rng.generator(_TARGET))

    def make_initial_params(self, n: int) -> np.ndarray:
        if self.initial_params is not None:
            p = np.asarray(self.initial_params, dtype=float)
            if p.size != n:
                raise ValueError(f"initial_params has {p.size} entries, ansatz needs {n}")
            return p.copy()
        return self.rng.generator(_INIT).uniform(0.0, 2 * math.pi, n)


@dataclass
class RunResult:
    records: list[RunRecord]
    u_target: np.ndarray
    params: np.ndarray
    ansatz: Ansatz = field(repr=False)


def run_tomography(config: TomographyConfig,
                   on_record: Callable[[RunRecord, list], None] | None = None) -> RunResult:
    """Optimise the ansatz against a seeded target for ``config.iterations`` steps.

    Each iteration computes the gradient, applies one Adam step and records
    the cost at the updated parameters together with the process fidelity of
    the ideal ansatz unitary. ``on_record(record, trace)`` receives the
    per-input intensity trace of the recorded evaluation (photonic only).
    """
    ansatz = config.make_ansatz()
    u_target = _check_shapes(config.make_target(), ansatz)
    params = config.make_initial_params(ansatz.num_params)
    backend = config.backend
    streams = config.rng
    if isinstance(backend, Photonic) and backend.floor_estimate is None and backend.noise.has_floor:
        floor = estimate_noisefloor(backend.noise, 2 ** (config.t + 1), streams.generator(_FLOOR))
        backend = replace(backend, floor_estimate=floor)
    stochastic = not isinstance(backend, Exact)

    state = AdamState.zeros(ansatz.num_params, config.learning_rate)
    records: list[RunRecord] = []
    for it in range(config.iterations):
        start = time.perf_counter()
        rng_for = None
        if stochastic:
            rng_for = lambda i, s, it=it: streams.generator(_GRAD, it, i, s)  # noqa: E731
        grad = gradient(u_target, ansatz, params, backend, rng_for, config.workers)
        state, params = adam_step(state, grad, params)
        trace: list = []
        rec_rng = streams.generator(_RECORD, it) if stochastic else None
        c = cost(u_target, ansatz, params, backend, rec_rng, trace)
        fid = process_fidelity(u_target, ansatz.unitary(params))
        rec = RunRecord(it, c, fid, time.perf_counter() - start)
        records.append(rec)
        if on_record is not None:
            on_record(rec, trace)
    return RunResult(records, u_target, params, ansatz)
