"""Rectangular (Clements) mesh decomposition of an m-mode unitary.

A unit cell on neighbouring modes ``(m1, m1 + 1)`` acts with the block::

    [[e^{i phi} cos(theta/2), -sin(theta/2)],
     [e^{i phi} sin(theta/2),  cos(theta/2)]]

and a mesh reconstructs ``U = diag(D) @ T_0 @ T_1 @ ... @ T_{K-1}`` with the
cells in sequence order. The local processor has no output phase row, which
:func:`strip_output_phases` emulates: it changes the matrix but not the
output intensities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numerics import DomainError, ShapeError, as_unitary

NULL_TOL = 1e-12
TWO_PI = 2 * math.pi


def wrap_phase(phi: float) -> float:
    phi = math.fmod(phi, TWO_PI)
    if phi < 0:
        phi += TWO_PI
    if phi >= TWO_PI:
        phi = 0.0
    return phi


@dataclass(frozen=True)
class UnitCell:
    m1: int
    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta={self.theta} outside [0, pi]")
        if not 0.0 <= self.phi < TWO_PI:
            raise ValueError(f"phi={self.phi} outside [0, 2pi)")
        if self.m1 < 0:
            raise ValueError(f"negative mode index {self.m1}")

    @property
    def m2(self) -> int:
        return self.m1 + 1


@dataclass(frozen=True)
class MeshProgram:
    m: int
    cells: tuple[UnitCell, ...]
    output_phases: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        d = np.array(self.output_phases, dtype=np.complex128)
        if d.shape != (self.m,):
            raise ShapeError(f"need {self.m} output phases, got shape {d.shape}")
        if np.any(np.abs(np.abs(d) - 1.0) > 1e-10):
            raise DomainError("output phases must have unit modulus")
        d.setflags(write=False)
        object.__setattr__(self, "output_phases", d)
        for c in self.cells:
            if c.m2 >= self.m:
                raise ValueError(f"cell on modes ({c.m1}, {c.m2}) outside {self.m} modes")

    @property
    def thetas(self) -> np.ndarray:
        return np.array([c.theta for c in self.cells])

    @property
    def phis(self) -> np.ndarray:
        return np.array([c.phi for c in self.cells])

    @property
    def modes(self) -> np.ndarray:
        return np.array([c.m1 for c in self.cells], dtype=int)


def cell_block(theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    e = complex(math.cos(phi), math.sin(phi))
    return np.array([[e * c, -s], [e * s, c]])


def cell_matrix(cell: UnitCell, m: int) -> np.ndarray:
    if cell.m2 >= m:
        raise IndexError(f"cell on modes ({cell.m1}, {cell.m2}) outside {m} modes")
    u = np.eye(m, dtype=np.complex128)
    u[cell.m1:cell.m1 + 2, cell.m1:cell.m1 + 2] = cell_block(cell.theta, cell.phi)
    return u


def _null_right(a: complex, b: complex) -> tuple[float, float]:
    # choose T so that (U T^dag) nulls the entry holding a
    if abs(a) < NULL_TOL:
        return 0.0, 0.0
    theta = 2 * math.atan2(abs(a), abs(b))
    phi = 0.0 if abs(b) < NULL_TOL else np.angle(a) - np.angle(b)
    return theta, phi


def _null_left(a: complex, b: complex) -> tuple[float, float]:
    # choose T so that (T U) nulls the entry holding b
    if abs(b) < NULL_TOL:
        return 0.0, 0.0
    theta = 2 * math.atan2(abs(b), abs(a))
    phi = 0.0 if abs(a) < NULL_TOL else np.angle(-b) - np.angle(a)
    return theta, phi


def decompose(u) -> MeshProgram:
    """Factor ``u`` into ``m(m-1)/2`` unit cells and an output phase row."""
    try:
        u = np.array(as_unitary(u), dtype=np.complex128)
    except (ShapeError, DomainError) as exc:
        raise DomainError(f"decompose needs a unitary: {exc}") from exc
    n = u.shape[0]
    right: list[tuple[int, float, float]] = []
    left: list[tuple[int, float, float]] = []
    for i in range(n - 1):
        if i % 2 == 0:
            for j in range(i + 1):
                row, col = n - 1 - j, i - j
                theta, phi = _null_right(u[row, col], u[row, col + 1])
                blk = cell_block(theta, phi)
                u[:, col:col + 2] = u[:, col:col + 2] @ blk.conj().T
                right.append((col, theta, phi))
        else:
            for j in range(1, i + 2):
                row, col = n + j - i - 2, j - 1
                theta, phi = _null_left(u[row - 1, col], u[row, col])
                blk = cell_block(theta, phi)
                u[row - 1:row + 1, :] = blk @ u[row - 1:row + 1, :]
                left.append((row - 1, theta, phi))

    # u is now diagonal: U = L_1^dag ... L_k^dag D R_p ... R_1.
    # Push each L^dag through D: T^dag diag(d1, d2) = diag(-e^{-i phi} d2, d2) T(theta, phi')
    # with e^{i phi'} = -d1 / d2.
    d = np.diagonal(u).copy()
    moved: list[tuple[int, float, float]] = []
    for m1, theta, phi in reversed(left):
        d1, d2 = d[m1], d[m1 + 1]
        new_phi = float(np.angle(-d1 / d2))
        d[m1] = -np.exp(-1j * phi) * d2
        moved.append((m1, theta, new_phi))
    moved.reverse()
    seq = moved + right[::-1]
    cells = tuple(UnitCell(m1, min(max(theta, 0.0), math.pi), wrap_phase(phi)) for m1, theta, phi in seq)
    return MeshProgram(n, cells, d / np.abs(d))


def reconstruct(mesh: MeshProgram) -> np.ndarray:
    return mesh_unitary(mesh.m, mesh.modes, mesh.thetas, mesh.phis, mesh.output_phases)


def mesh_unitary(m: int, modes, thetas, phis, output_phases=None) -> np.ndarray:
    """``diag(D) @ T_0 @ ... @ T_{K-1}`` from raw parameter arrays."""
    u = np.diag(np.ones(m, dtype=np.complex128) if output_phases is None
                else np.asarray(output_phases, dtype=np.complex128))
    for m1, theta, phi in zip(modes, thetas, phis):
        u[:, m1:m1 + 2] = u[:, m1:m1 + 2] @ cell_block(theta, phi)
    return u


def mesh_column(m: int, modes, thetas, phis, j: int, output_phases=None) -> np.ndarray:
    """Column ``j`` of the mesh unitary, i.e. the output field for light in mode ``j``."""
    v = np.zeros(m, dtype=np.complex128)
    v[j] = 1.0
    for m1, theta, phi in zip(modes[::-1], thetas[::-1], phis[::-1]):
        v[m1:m1 + 2] = cell_block(theta, phi) @ v[m1:m1 + 2]
    if output_phases is not None:
        v = np.asarray(output_phases) * v
    return v


def strip_output_phases(mesh: MeshProgram) -> MeshProgram:
    return MeshProgram(mesh.m, mesh.cells, np.ones(mesh.m, dtype=np.complex128))


def absorb_input_permutation(u, j: int) -> np.ndarray:
    """``U @ P_j`` where ``P_j`` swaps columns 0 and ``j``.

    Feeding the physical input mode 0 of the result reproduces the response
    of ``u`` to input mode ``j``.
    """
    u = np.array(u, dtype=np.complex128)
    if not 0 <= j < u.shape[1]:
        raise IndexError(f"mode {j} outside {u.shape[1]} modes")
    u[:, [0, j]] = u[:, [j, 0]]
    return u


# Text format: "m cell_count", one "m1 theta phi" line per cell, then one line
# with m output phases as "re im" pairs.

def format_mesh(mesh: MeshProgram) -> str:
    lines = [f"{mesh.m} {len(mesh.cells)}"]
    lines += [f"{c.m1} {c.theta:.17g} {c.phi:.17g}" for c in mesh.cells]
    lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in mesh.output_phases))
    return "\n".join(lines) + "\n"


def parse_mesh(text: str) -> MeshProgram:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise ShapeError("mesh file needs an 'm cell_count' header")
    m, k = int(lines[0][0]), int(lines[0][1])
    if len(lines) != k + 2:
        raise ShapeError(f"expected {k} cell lines and one phase line, found {len(lines) - 1} lines")
    cells = []
    for i, parts in enumerate(lines[1:k + 1], start=2):
        if len(parts) != 3:
            raise ShapeError(f"line {i}: expected 'm1 theta phi'")
        cells.append(UnitCell(int(parts[0]), float(parts[1]), float(parts[2])))
    ph = [float(x) for x in lines[k + 1]]
    if len(ph) != 2 * m:
        raise ShapeError(f"phase line needs {2 * m} numbers, got {len(ph)}")
    d = np.array(ph[0::2]) + 1j * np.array(ph[1::2])
    return MeshProgram(m, cells, d)


def read_mesh(path) -> MeshProgram:
    return parse_mesh(Path(path).read_text())


def write_mesh(path, mesh: MeshProgram) -> None:
    Path(path).write_text(format_mesh(mesh))
