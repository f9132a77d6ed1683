"""Dense state vectors for n-qubit registers.

Basis label ``|q0 q1 ... q(n-1)>`` maps to index ``sum(q_i * 2**(n-1-i))``:
qubit 0 is the most significant bit, so kets read left to right.

A :class:`RegisterState` stores an amplitude array plus a separate scalar
global phase. Operations that only multiply the whole state by ``e^{i theta}``
update the scalar and leave the array untouched, which keeps measurement
probabilities bit-identical under global phases.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import kernels
from .errors import InvalidArgument, InvalidGate, NumericalError

MAX_QUBITS = 20
NORM_TOL = 1e-10
UNITARY_TOL = 1e-10
COMPONENT_THRESHOLD = 1e-12


def _check_n_qubits(n_qubits: int) -> None:
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise InvalidArgument(f"n_qubits must be an integer in 1..{MAX_QUBITS}, got {n_qubits!r}")


@dataclass(frozen=True, eq=False)
class RegisterState:
    """Normalized pure state of ``n_qubits`` qubits.

    ``amps`` is read-only; every operation returns a new state. The physical
    amplitude vector is ``exp(1j * phase) * amps`` (see :attr:`amplitudes`).
    """

    n_qubits: int
    amps: np.ndarray
    phase: float = 0.0

    def __post_init__(self):
        _check_n_qubits(self.n_qubits)
        amps = np.array(self.amps, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != 1 << self.n_qubits:
            raise InvalidArgument(
                f"expected {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, got {amps.shape[0]}"
            )
        if not np.all(np.isfinite(amps)) or not math.isfinite(self.phase):
            raise NumericalError("state contains NaN or Inf")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvalidArgument(f"state is not normalized (sum |a|^2 = {norm2!r})")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "phase", float(self.phase))

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    @property
    def amplitudes(self) -> np.ndarray:
        """Amplitude vector with the global phase folded in."""
        if self.phase == 0.0:
            return self.amps.copy()
        return cmath.exp(1j * self.phase) * self.amps

    @property
    def probabilities(self) -> np.ndarray:
        return self.amps.real**2 + self.amps.imag**2

    def norm(self) -> float:
        return math.sqrt(float(np.vdot(self.amps, self.amps).real))

    def amplitude(self, index: int) -> complex:
        return cmath.exp(1j * self.phase) * complex(self.amps[index])

    def __repr__(self):
        return f"RegisterState(n_qubits={self.n_qubits}, phase={self.phase!r})"


def _evolved(state: RegisterState, amps: np.ndarray, phase: float | None = None) -> RegisterState:
    # operations must not renormalize silently; drift beyond tolerance is a bug
    norm2 = float(np.vdot(amps, amps).real)
    if not math.isfinite(norm2) or abs(norm2 - 1.0) > NORM_TOL:
        raise NumericalError(f"norm drifted to {norm2!r} (tolerance {NORM_TOL})")
    return RegisterState(state.n_qubits, amps, state.phase if phase is None else phase)


def from_amplitudes(amps: Sequence[complex], *, normalize: bool = False) -> RegisterState:
    """Build a state from an explicit amplitude vector (length must be a power of two)."""
    amps = np.asarray(amps, dtype=np.complex128).reshape(-1)
    size = amps.shape[0]
    if size < 2 or size & (size - 1):
        raise InvalidArgument(f"amplitude count {size} is not a power of two >= 2")
    if normalize:
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise InvalidArgument("cannot normalize the zero vector")
        amps = amps / norm
    return RegisterState(size.bit_length() - 1, amps)


def init_basis(n_qubits: int, basis_index: int) -> RegisterState:
    _check_n_qubits(n_qubits)
    if not 0 <= basis_index < 1 << n_qubits:
        raise InvalidArgument(f"basis_index {basis_index} out of range for {n_qubits} qubits")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[basis_index] = 1.0
    return RegisterState(n_qubits, amps)


def uniform_state(n_qubits: int) -> RegisterState:
    """Equal superposition with every amplitude exactly ``1/sqrt(N)``."""
    _check_n_qubits(n_qubits)
    size = 1 << n_qubits
    return RegisterState(n_qubits, np.full(size, 1.0 / math.sqrt(size), dtype=np.complex128))


# -- gates -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GateMatrix:
    """Unitary on one or two wires, times a scalar phase ``exp(1j * phase)``.

    For two-qubit gates the matrix acts on ``|w0 w1>`` with ``wires[0]`` as
    the high bit.
    """

    matrix: np.ndarray
    wires: tuple[int, ...]
    phase: float = 0.0

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.complex128)
        wires = tuple(int(w) for w in np.atleast_1d(self.wires))
        if len(wires) not in (1, 2):
            raise InvalidArgument(f"gates act on 1 or 2 wires, got {wires}")
        if len(set(wires)) != len(wires) or min(wires) < 0:
            raise InvalidArgument(f"wires must be distinct non-negative indices, got {wires}")
        dim = 1 << len(wires)
        if matrix.shape != (dim, dim):
            raise InvalidGate(f"{len(wires)}-wire gate needs a {dim}x{dim} matrix, got {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise InvalidGate("gate matrix contains NaN or Inf")
        err = unitarity_error(matrix)
        if err > UNITARY_TOL:
            raise InvalidGate(f"matrix is not unitary (max |U^H U - I| = {err:.3e})")
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "wires", wires)
        object.__setattr__(self, "phase", float(self.phase))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def entries(self) -> np.ndarray:
        """Full operator ``exp(1j*phase) * matrix``."""
        if self.phase == 0.0:
            return self.matrix.copy()
        return cmath.exp(1j * self.phase) * self.matrix

    def dagger(self) -> GateMatrix:
        return GateMatrix(self.matrix.conj().T, self.wires, -self.phase)

    def on(self, *wires: int) -> GateMatrix:
        return GateMatrix(self.matrix, wires, self.phase)


def unitarity_error(matrix: np.ndarray) -> float:
    matrix = np.asarray(matrix)
    return float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))))


HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY = np.eye(2, dtype=np.complex128)


def hadamard(wire: int) -> GateMatrix:
    """The transform ``M = [[1, 1], [1, -1]] / sqrt(2)``."""
    return GateMatrix(HADAMARD, (wire,))


def pauli_x(wire: int) -> GateMatrix:
    return GateMatrix(PAULI_X, (wire,))


def pauli_z(wire: int) -> GateMatrix:
    return GateMatrix(PAULI_Z, (wire,))


def identity(wire: int) -> GateMatrix:
    return GateMatrix(IDENTITY, (wire,))


def phase_shift(wire: int, theta: float) -> GateMatrix:
    return GateMatrix(np.diag([1.0, cmath.exp(1j * theta)]), (wire,))


def controlled(gate: GateMatrix, control: int) -> GateMatrix:
    """Controlled version of a one-qubit gate, wires ``(control, target)``.

    The gate's scalar phase becomes part of the controlled block, where it is
    a relative phase between the control branches.
    """
    if gate.dim != 2:
        raise InvalidArgument("controlled() expects a one-qubit gate")
    block = np.eye(4, dtype=np.complex128)
    block[2:, 2:] = gate.entries
    return GateMatrix(block, (control, gate.wires[0]))


def apply_gate(state: RegisterState, gate: GateMatrix) -> RegisterState:
    wires = gate.wires
    if max(wires) >= state.n_qubits:
        raise InvalidArgument(f"wires {wires} out of range for {state.n_qubits} qubits")
    amps = state.amps.copy()
    if gate.dim == 2:
        kernels.apply_1q(amps, state.n_qubits, wires[0], gate.matrix)
    else:
        kernels.apply_2q(amps, state.n_qubits, wires[0], wires[1], gate.matrix)
    return _evolved(state, amps, state.phase + gate.phase)


def apply_gates(state: RegisterState, gates: Iterable[GateMatrix]) -> RegisterState:
    for gate in gates:
        state = apply_gate(state, gate)
    return state


def apply_global_phase(state: RegisterState, theta: float) -> RegisterState:
    return RegisterState(state.n_qubits, state.amps, state.phase + theta)


def apply_phase_vector(state: RegisterState, thetas: Sequence[float]) -> RegisterState:
    """Multiply amplitude ``k`` by ``exp(1j * thetas[k])``."""
    thetas = np.ascontiguousarray(thetas, dtype=np.float64).reshape(-1)
    if thetas.shape[0] != state.dim:
        raise InvalidArgument(f"expected {state.dim} phases, got {thetas.shape[0]}")
    amps = state.amps.copy()
    kernels.apply_phases(amps, thetas)
    return _evolved(state, amps)


def measure_all(state: RegisterState, rng: np.random.Generator) -> tuple[int, RegisterState]:
    """Sample a basis index with Born probabilities and collapse onto it."""
    cdf = np.cumsum(state.probabilities)
    index = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    index = min(index, state.dim - 1)
    return index, init_basis(state.n_qubits, index)


def inner(a: RegisterState, b: RegisterState) -> complex:
    """``<a|b>`` including both global phases."""
    if a.n_qubits != b.n_qubits:
        raise InvalidArgument(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    return cmath.exp(1j * (b.phase - a.phase)) * complex(np.vdot(a.amps, b.amps))


def fidelity(a: RegisterState, b: RegisterState) -> float:
    if a.n_qubits != b.n_qubits:
        raise InvalidArgument(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    overlap = np.vdot(a.amps, b.amps)
    return min(1.0, float(overlap.real**2 + overlap.imag**2))


def component_count(state: RegisterState, threshold: float = COMPONENT_THRESHOLD) -> int:
    """Number of basis states with probability strictly above ``threshold``."""
    if threshold < 0:
        raise InvalidArgument("threshold must be >= 0")
    return int(np.count_nonzero(state.probabilities > threshold))


# -- text dump ---------------------------------------------------------------


def format_state(state: RegisterState) -> str:
    """Lines ``index<TAB>re<TAB>im`` with 17 significant digits, ascending index."""
    amps = state.amplitudes
    return "".join(f"{k}\t{a.real:.16e}\t{a.imag:.16e}\n" for k, a in enumerate(amps))


def dump_state(state: RegisterState, fp: TextIO) -> None:
    fp.write(format_state(state))


def parse_state(text: str) -> RegisterState:
    rows = [line.split("\t") for line in text.splitlines() if line.strip()]
    amps = np.zeros(len(rows), dtype=np.complex128)
    for expected, row in enumerate(rows):
        if len(row) != 3 or int(row[0]) != expected:
            raise InvalidArgument(f"malformed state dump line {expected + 1}: {row!r}")
        amps[expected] = complex(float(row[1]), float(row[2]))
    return from_amplitudes(amps)
