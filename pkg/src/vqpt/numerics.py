"""Dense complex linear algebra shared by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The validating
constructors (:func:`as_matrix`, :func:`as_unitary`, :func:`as_state`) return
read-only copies so that values handed between modules cannot be mutated.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

UNITARY_TOL = 1e-10
STATE_TOL = 1e-10


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible."""


class DomainError(ValueError):
    """Raised when a value violates a mathematical precondition."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    return _frozen(a)


def unitarity_residual(a) -> float:
    a = np.asarray(a)
    return float(np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0])))


def is_unitary(a, tol: float = UNITARY_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and unitarity_residual(a) < tol


def as_unitary(a, tol: float = UNITARY_TOL) -> np.ndarray:
    """Validate ``a`` as a unitary (``||U^dag U - I||_F < tol``)."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"unitary must be square, got shape {a.shape}")
    res = unitarity_residual(a)
    if res >= tol:
        raise DomainError(f"matrix is not unitary (residual {res:.3e} >= {tol:.1e})")
    return a


def as_state(v, tol: float = STATE_TOL) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1 or v.size < 1:
        raise ShapeError(f"expected a 1-d state vector, got shape {v.shape}")
    norm = float(np.sum(np.abs(v) ** 2))
    if abs(norm - 1.0) >= tol:
        raise DomainError(f"state is not normalized (sum |a|^2 = {norm!r})")
    return _frozen(v)


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b


def dagger(a) -> np.ndarray:
    return np.asarray(a, dtype=np.complex128).conj().T


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def qr_decompose(a) -> tuple[np.ndarray, np.ndarray]:
    """Householder QR of a square matrix (LAPACK ``geqrf``/``ungqr``)."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"qr_decompose needs a square matrix, got shape {a.shape}")
    q, r = np.linalg.qr(a, mode="complete")
    return q, r


def frobenius_distance(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


# Fixture text format: "rows cols" header, then one "re im" line per entry
# in row-major order.

def format_matrix(a) -> str:
    a = as_matrix(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    lines += [f"{z.real:.17g} {z.imag:.17g}" for z in a.ravel(order="C")]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ShapeError("empty matrix file")
    try:
        rows, cols = (int(x) for x in lines[0].split())
    except ValueError as exc:
        raise ShapeError(f"bad matrix header {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != rows * cols:
        raise ShapeError(f"expected {rows * cols} entries, found {len(body)}")
    vals = []
    for i, ln in enumerate(body, start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise ShapeError(f"line {i}: expected 're im', got {ln!r}")
        vals.append(complex(float(parts[0]), float(parts[1])))
    return as_matrix(np.array(vals).reshape(rows, cols))


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def write_matrix(path, a) -> None:
    Path(path).write_text(format_matrix(a))
