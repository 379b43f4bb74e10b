"""Seeded Haar-random unitaries (Ginibre matrix, QR, diagonal phase fix)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import DomainError, qr_decompose


@dataclass(frozen=True)
class SeededRng:
    """Reproducible random stream labelled by ``(seed, stream_id)``.

    Streams are numpy ``PCG64`` generators seeded through ``SeedSequence``
    with ``spawn_key=(stream_id, *subkeys)``, so any number of independent
    child streams can be derived deterministically, whatever order they are
    requested in.
    """

    seed: int
    stream_id: int = 0

    def generator(self, *subkeys: int) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream_id, *subkeys)
        )
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream_id: int) -> "SeededRng":
        return SeededRng(self.seed, stream_id)


def _rng(rng) -> np.random.Generator:
    if isinstance(rng, SeededRng):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def ginibre(dim: int, rng) -> np.ndarray:
    """``dim x dim`` matrix of i.i.d. standard complex Gaussians (E|z|^2 = 1)."""
    gen = _rng(rng)
    return (gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))) / np.sqrt(2)


def haar_unitary(dim: int, rng) -> np.ndarray:
    """Draw a Haar-distributed ``dim x dim`` unitary.

    Returns ``Q @ diag(R_ii / |R_ii|)`` for ``Q, R = qr(G)``. Without the
    phase correction the diagonal phases of ``Q`` inherit the sign convention
    of the QR routine and the result is not Haar.
    """
    if dim < 1:
        raise DomainError(f"dim must be >= 1, got {dim}")
    q, r = qr_decompose(ginibre(dim, rng))
    d = np.diagonal(r)
    mag = np.abs(d)
    lam = np.where(mag > 0, d / np.where(mag > 0, mag, 1.0), 1.0)
    return q * lam[None, :]


def haar_unitary_uncorrected(dim: int, rng) -> np.ndarray:
    """Plain ``Q`` factor of a Ginibre matrix. Biased; kept for comparison tests."""
    q, _ = qr_decompose(ginibre(dim, rng))
    return q
