"""Qubit gate model, the variational ansatz, and the Hadamard-test circuit.

Bit ordering: qubit 0 is the most significant bit of a basis-state label and
the ancilla is the last (least significant) qubit. With this order the
optical mode index of a one-hot encoded basis state is simply the integer
value of its label.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .numerics import ShapeError, as_unitary


class GateKind(str, Enum):
    RZ = "RZ"
    RY = "RY"
    RX = "RX"
    H = "H"
    X = "X"
    CX = "CX"
    CONTROLLED_U = "CONTROLLED-U"
    OPEN_CONTROLLED_U = "OPEN-CONTROLLED-U"


ROTATIONS = {GateKind.RZ, GateKind.RY, GateKind.RX}

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
# control is the more significant of the two qubits
_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


_ROT = {GateKind.RZ: rz, GateKind.RY: ry, GateKind.RX: rx}


@dataclass(frozen=True)
class Gate:
    """One gate of a :class:`Circuit`.

    Rotations carry either a fixed ``angle`` or a ``param`` index into the
    parameter vector. ``CONTROLLED-U`` gates act with ``payload`` on the
    contiguous register ``target, target+1, ...`` when ``control`` is 1
    (0 for the open-controlled variant).
    """

    kind: GateKind
    target: int
    control: int | None = None
    angle: float | None = None
    param: int | None = None
    payload: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in ROTATIONS:
            if (self.angle is None) == (self.param is None):
                raise ValueError(f"{kind.value} needs exactly one of angle/param")
        elif self.angle is not None or self.param is not None:
            raise ValueError(f"{kind.value} takes no angle")
        needs_control = kind in (GateKind.CX, GateKind.CONTROLLED_U, GateKind.OPEN_CONTROLLED_U)
        if needs_control and self.control is None:
            raise ValueError(f"{kind.value} needs a control qubit")
        if kind in (GateKind.CONTROLLED_U, GateKind.OPEN_CONTROLLED_U):
            if self.payload is None:
                raise ValueError(f"{kind.value} needs a unitary payload")
            object.__setattr__(self, "payload", as_unitary(self.payload))
            k = _num_qubits(self.payload.shape[0])
            if self.control in self.qubits[:k]:
                raise ValueError("control qubit overlaps the payload register")
        elif self.control is not None and self.control == self.target:
            raise ValueError("control and target must differ")

    @property
    def qubits(self) -> tuple[int, ...]:
        if self.kind in (GateKind.CONTROLLED_U, GateKind.OPEN_CONTROLLED_U):
            k = _num_qubits(self.payload.shape[0])
            return tuple(range(self.target, self.target + k)) + (self.control,)
        if self.control is not None:
            return (self.control, self.target)
        return (self.target,)

    def matrix(self, params=None) -> np.ndarray:
        """Matrix on :attr:`qubits` (first listed qubit most significant)."""
        kind = self.kind
        if kind in ROTATIONS:
            theta = self.angle if self.param is None else params[self.param]
            return _ROT[kind](theta)
        if kind is GateKind.H:
            return _H
        if kind is GateKind.X:
            return _X
        if kind is GateKind.CX:
            return _CX
        value = 1 if kind is GateKind.CONTROLLED_U else 0
        return controlled(self.payload, value, check=False)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits or min(g.qubits) < 0:
                raise ValueError(f"gate {g.kind.value} on {g.qubits} outside {self.n_qubits} qubits")

    @property
    def num_params(self) -> int:
        idx = [g.param for g in self.gates if g.param is not None]
        return max(idx) + 1 if idx else 0

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def unitary(self, params=()) -> np.ndarray:
        return compile_circuit(self, params)


@dataclass(frozen=True)
class AnsatzSpec:
    """Shape of the layered ansatz: ``t`` qubits, ``d`` repetition blocks.

    ``entangler`` selects the CX pattern: ``"alternating"`` pairs neighbours
    starting at qubit 0 on even blocks and qubit 1 on odd blocks (falling back
    to ``(0, 1)`` when the odd pattern is empty, i.e. ``t = 2``); ``"chain"``
    applies ``CX(q, q+1)`` for every neighbour pair in every block.
    """

    t: int
    d: int
    entangler: str = "alternating"

    def __post_init__(self):
        if self.t < 1 or self.d < 1:
            raise ValueError(f"need t >= 1 and d >= 1, got t={self.t}, d={self.d}")
        if self.entangler not in ("alternating", "chain"):
            raise ValueError(f"unknown entangler {self.entangler!r}")

    @property
    def num_params(self) -> int:
        return 3 * self.t * self.d


def entangler_pairs(t: int, block: int, entangler: str = "alternating") -> list[tuple[int, int]]:
    if t < 2:
        return []
    if entangler == "chain":
        return [(q, q + 1) for q in range(t - 1)]
    pairs = [(q, q + 1) for q in range(block % 2, t - 1, 2)]
    return pairs or [(0, 1)]


def build_ansatz(spec: AnsatzSpec) -> Circuit:
    """RZ-RY-RZ on every qubit followed by a CX layer, repeated ``d`` times.

    Parameter ``3*t*k + 3*q + r`` is rotation ``r`` on qubit ``q`` in block ``k``.
    """
    gates: list[Gate] = []
    p = 0
    for k in range(spec.d):
        for q in range(spec.t):
            for kind in (GateKind.RZ, GateKind.RY, GateKind.RZ):
                gates.append(Gate(kind, q, param=p))
                p += 1
        for c, tq in entangler_pairs(spec.t, k, spec.entangler):
            gates.append(Gate(GateKind.CX, tq, control=c))
    return Circuit(spec.t, tuple(gates))


def _num_qubits(dim: int) -> int:
    k = int(dim).bit_length() - 1
    if dim < 1 or 2**k != dim:
        raise ShapeError(f"dimension {dim} is not a power of two")
    return k


def apply_gate(mat: np.ndarray, gate_matrix: np.ndarray, qubits, n: int) -> np.ndarray:
    """Left-multiply the ``2^n`` matrix (or state) ``mat`` by a gate on ``qubits``."""
    k = len(qubits)
    cols = mat.shape[1:] if mat.ndim == 2 else ()
    t = mat.reshape((2,) * n + cols)
    g = gate_matrix.reshape((2,) * (2 * k))
    out = np.tensordot(g, t, axes=(list(range(k, 2 * k)), list(qubits)))
    out = np.moveaxis(out, list(range(k)), list(qubits))
    return out.reshape(mat.shape)


def compile_circuit(circuit: Circuit, params=()) -> np.ndarray:
    """Unitary of ``circuit`` with rotation parameters taken from ``params``."""
    params = np.asarray(params, dtype=float).ravel()
    if params.size != circuit.num_params:
        raise ValueError(f"circuit takes {circuit.num_params} parameters, got {params.size}")
    n = circuit.n_qubits
    u = np.eye(2**n, dtype=np.complex128)
    for g in circuit.gates:
        u = apply_gate(u, g.matrix(params), g.qubits, n)
    return u


def controlled(u, control_value: int = 1, check: bool = True) -> np.ndarray:
    """Block matrix applying ``u`` to the register iff the appended LSB ancilla equals ``control_value``."""
    u = as_unitary(u) if check else np.asarray(u, dtype=np.complex128)
    dim = u.shape[0]
    _num_qubits(dim)
    if control_value not in (0, 1):
        raise ValueError("control_value must be 0 or 1")
    out = np.zeros((2 * dim, 2 * dim), dtype=np.complex128)
    on = slice(control_value, None, 2)
    off = slice(1 - control_value, None, 2)
    out[on, on] = u
    out[off, off] = np.eye(dim)
    return out


def hadamard_on_ancilla(t: int) -> np.ndarray:
    return np.kron(np.eye(2**t), _H)


def build_tomography_unitary(u_target, u_vqc) -> np.ndarray:
    """``H_a . open-controlled(U_VQC) . controlled(U) . H_a`` on ``t + 1`` qubits.

    ``u_vqc`` may be a unitary or a ``(circuit, params)`` pair.
    """
    if isinstance(u_vqc, tuple):
        circ, params = u_vqc
        u_vqc = compile_circuit(circ, params)
    u_target = np.asarray(u_target, dtype=np.complex128)
    u_vqc = np.asarray(u_vqc, dtype=np.complex128)
    if u_target.shape != u_vqc.shape or u_target.ndim != 2:
        raise ShapeError(f"target {u_target.shape} and ansatz {u_vqc.shape} differ")
    t = _num_qubits(u_target.shape[0])
    h = hadamard_on_ancilla(t)
    return h @ controlled(u_vqc, 0) @ controlled(u_target, 1) @ h


def tomography_circuit(u_target, u_vqc) -> Circuit:
    """Gate-list form of :func:`build_tomography_unitary` (no free parameters)."""
    t = _num_qubits(np.asarray(u_target).shape[0])
    a = t
    return Circuit(t + 1, (
        Gate(GateKind.H, a),
        Gate(GateKind.CONTROLLED_U, 0, control=a, payload=u_target),
        Gate(GateKind.OPEN_CONTROLLED_U, 0, control=a, payload=u_vqc),
        Gate(GateKind.H, a),
    ))


def ancilla_zero_probability_from_state(state: np.ndarray) -> float:
    return float(np.sum(np.abs(state[0::2]) ** 2))
