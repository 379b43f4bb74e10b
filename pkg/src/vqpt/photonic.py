"""Classical one-hot scattering experiment on a mesh, with noise and the lab
data pipeline (noisefloor subtraction, clamping, normalisation).

A logical n-qubit basis state ``|b_1 ... b_n>`` is sent as light into the
single optical mode whose index is the integer value of the bit string.
Only intensities are recorded, so every downstream quantity is built from
probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clements import MeshProgram, mesh_column
from .numerics import DomainError, ShapeError

FLOOR_SAMPLES = 380
# Non-default operating point for the detector offset: 1% of the total
# signal with 0.1% reading-to-reading spread.
LAB_FLOOR_MEAN = 1e-2
LAB_FLOOR_SIGMA = 1e-3


class DegenerateSignalError(DomainError):
    """No intensity left after noisefloor subtraction."""


@dataclass(frozen=True)
class OneHotIndex:
    n: int
    j: int

    def __post_init__(self):
        if not 0 <= self.j < 2**self.n:
            raise DomainError(f"mode {self.j} outside 0..{2**self.n - 1}")

    @property
    def label(self) -> str:
        return format(self.j, f"0{self.n}b")


def encode(n: int, label: str) -> OneHotIndex:
    if len(label) != n or any(ch not in "01" for ch in label):
        raise DomainError(f"label {label!r} is not an {n}-bit string")
    return OneHotIndex(n, int(label, 2))


@dataclass(frozen=True)
class NoiseConfig:
    """Noise knobs for :func:`scatter_raw`. All zero means exact scattering.

    phase_sigma
        std-dev (rad) of i.i.d. Gaussian jitter on every cell theta and phi,
        redrawn on every evaluation (heater thermal noise).
    noisefloor_mean, noisefloor_sigma
        detector offset added to each mode reading, and its per-reading spread.
    intensity_noise_sigma
        relative multiplicative fluctuation per mode.
    """

    phase_sigma: float = 0.0
    noisefloor_mean: float = 0.0
    noisefloor_sigma: float = 0.0
    intensity_noise_sigma: float = 0.0

    def __post_init__(self):
        for name in ("phase_sigma", "noisefloor_mean", "noisefloor_sigma", "intensity_noise_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def noiseless(self) -> bool:
        return (self.phase_sigma == 0 and self.noisefloor_mean == 0
                and self.noisefloor_sigma == 0 and self.intensity_noise_sigma == 0)

    @property
    def has_floor(self) -> bool:
        return self.noisefloor_mean > 0 or self.noisefloor_sigma > 0

    @classmethod
    def lab_floor(cls, phase_sigma: float = 0.0) -> "NoiseConfig":
        return cls(phase_sigma=phase_sigma, noisefloor_mean=LAB_FLOOR_MEAN,
                   noisefloor_sigma=LAB_FLOOR_SIGMA)


@dataclass(frozen=True)
class IntensityDistribution:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float)
        if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise DomainError("intensities must be non-negative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def mode_count(self) -> int:
        return self.probabilities.size


def jitter_phases(mesh: MeshProgram, sigma: float, rng: np.random.Generator):
    thetas, phis = mesh.thetas, mesh.phis
    if sigma > 0:
        k = len(mesh.cells)
        thetas = np.clip(thetas + sigma * rng.standard_normal(k), 0.0, math.pi)
        phis = np.mod(phis + sigma * rng.standard_normal(k), 2 * math.pi)
    return thetas, phis


def floor_readings(noise: NoiseConfig, m: int, rng: np.random.Generator, size: int | None = None):
    shape = (m,) if size is None else (size, m)
    out = np.full(shape, noise.noisefloor_mean)
    if noise.noisefloor_sigma > 0:
        out = out + noise.noisefloor_sigma * rng.standard_normal(shape)
    return out


def estimate_noisefloor(noise: NoiseConfig, m: int, rng: np.random.Generator,
                        samples: int = FLOOR_SAMPLES) -> np.ndarray:
    """Per-mode average of ``samples`` dark readings."""
    if not noise.has_floor:
        return np.zeros(m)
    return floor_readings(noise, m, rng, size=samples).mean(axis=0)


def scatter_raw(mesh: MeshProgram, inp: OneHotIndex, noise: NoiseConfig | None = None,
                rng: np.random.Generator | None = None) -> np.ndarray:
    """Raw per-mode detector readings for light injected in mode ``inp.j``."""
    noise = noise or NoiseConfig()
    if mesh.m != 2**inp.n:
        raise ShapeError(f"mesh has {mesh.m} modes, input needs {2**inp.n}")
    if rng is None:
        if not noise.noiseless:
            raise ValueError("noisy scattering needs an explicit rng")
        rng = np.random.default_rng(0)
    thetas, phis = jitter_phases(mesh, noise.phase_sigma, rng)
    field = mesh_column(mesh.m, mesh.modes, thetas, phis, inp.j, mesh.output_phases)
    intensity = np.abs(field) ** 2
    if noise.intensity_noise_sigma > 0:
        intensity = intensity * (1 + noise.intensity_noise_sigma * rng.standard_normal(mesh.m))
        intensity = np.clip(intensity, 0.0, None)
    if noise.has_floor:
        intensity = intensity + floor_readings(noise, mesh.m, rng)
    return intensity


def subtract_floor(raw, noisefloor_estimate) -> np.ndarray:
    raw = np.asarray(raw, dtype=float)
    floor = np.asarray(noisefloor_estimate, dtype=float)
    if raw.shape != floor.shape:
        raise ShapeError(f"raw {raw.shape} and floor {floor.shape} differ")
    return np.clip(raw - floor, 0.0, None)


def process_raw(raw, noisefloor_estimate) -> IntensityDistribution:
    """Subtract the floor estimate, clamp at zero and normalise to unit sum."""
    floored = subtract_floor(raw, noisefloor_estimate)
    total = floored.sum()
    if not total > 0:
        raise DegenerateSignalError("signal vanished after noisefloor subtraction")
    return IntensityDistribution(floored / total)


def ancilla_zero_probability(dist: IntensityDistribution | np.ndarray, n: int) -> float:
    """Total weight on modes whose label ends in 0 (ancilla is the last bit)."""
    p = dist.probabilities if isinstance(dist, IntensityDistribution) else np.asarray(dist)
    if p.size != 2**n:
        raise ShapeError(f"distribution has {p.size} modes, expected {2**n}")
    return float(np.clip(p[0::2].sum(), 0.0, 1.0))
