"""Error channels: initialization phases, gate phases, phase random walks,
analog single-qubit unitary errors, decoherence laws and the occupancy
statistics of error patterns.

Every sampler takes an explicit ``numpy.random.Generator``.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, InvalidPattern
from .statevec import GateMatrix, RegisterState, _check_n_qubits

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


# -- initialization phase noise ----------------------------------------------

INIT_MODES = ("per_qubit", "per_basis_state")


@dataclass(frozen=True)
class InitPhaseNoise:
    """Unknown phases picked up while preparing the equal superposition.

    ``per_qubit`` gives each qubit its own pair of phases on ``|0>`` and
    ``|1>`` and forms the tensor product; ``per_basis_state`` draws an
    independent phase for every one of the ``2**n`` basis states. Phases are
    Gaussian with std ``sigma`` or, with ``uniform=True``, uniform on [0, 2pi).
    """

    mode: str = "per_basis_state"
    sigma: float = 0.0
    uniform: bool = False

    def __post_init__(self):
        if self.mode not in INIT_MODES:
            raise InvalidArgument(f"init phase mode must be one of {INIT_MODES}, got {self.mode!r}")
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise InvalidArgument(f"sigma must be finite and >= 0, got {self.sigma!r}")

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.uniform:
            return rng.uniform(0.0, TWO_PI, size)
        return self.sigma * rng.standard_normal(size)


def _bit_matrix(n_qubits: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits)
    shifts = np.arange(n_qubits - 1, -1, -1)
    return (idx[:, None] >> shifts[None, :]) & 1


def per_qubit_phases(thetas: np.ndarray) -> np.ndarray:
    """Basis-state phases of the tensor product of single-qubit states
    ``(e^{i t0}|0> + e^{i t1}|1>)/sqrt(2)``; ``thetas`` has shape ``(n, 2)``."""
    thetas = np.asarray(thetas, dtype=np.float64)
    bits = _bit_matrix(thetas.shape[0])
    return thetas[np.arange(thetas.shape[0]), bits].sum(axis=1)


def noisy_initialize(n_qubits: int, model: InitPhaseNoise, rng: np.random.Generator) -> RegisterState:
    _check_n_qubits(n_qubits)
    size = 1 << n_qubits
    if model.mode == "per_qubit":
        phases = per_qubit_phases(model.draw(rng, (n_qubits, 2)))
    else:
        phases = model.draw(rng, size)
    amps = (np.cos(phases) + 1j * np.sin(phases)) / math.sqrt(size)
    return RegisterState(n_qubits, amps)


# -- analog unitary errors ---------------------------------------------------


@dataclass(frozen=True)
class GeneralUnitaryError:
    """``[[e1*, e2*], [e2, -e1]] / sqrt(|e1|^2 + |e2|^2)``."""

    e1: complex
    e2: complex

    def __post_init__(self):
        if self.e1 == 0 and self.e2 == 0:
            raise InvalidArgument("e1 and e2 cannot both be zero")

    def matrix(self) -> np.ndarray:
        e1, e2 = complex(self.e1), complex(self.e2)
        scale = math.sqrt(abs(e1) ** 2 + abs(e2) ** 2)
        return np.array([[e1.conjugate(), e2.conjugate()], [e2, -e1]]) / scale

    def gate(self, wire: int = 0) -> GateMatrix:
        return GateMatrix(self.matrix(), (wire,))


ERROR_MODES = ("rotation", "haar")


def random_unitary_error(
    sigma_rotation: float, rng: np.random.Generator, wire: int = 0, mode: str = "rotation"
) -> GateMatrix:
    """Random single-qubit error unitary.

    ``rotation`` mode: ``Z @ [[e1*, e2*], [e2, -e1]]`` with
    ``e1 = cos(a) e^{i p1}``, ``e2 = sin(a) e^{i p2}`` and ``a, p1, p2`` drawn
    from N(0, sigma_rotation). The leading Z makes the family pass through the
    identity at zero draws. ``haar`` mode ignores sigma and returns a
    Haar-random unitary.
    """
    if mode == "haar":
        z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / math.sqrt(2)
        q, r = np.linalg.qr(z)
        d = np.diagonal(r)
        return GateMatrix(q * (d / np.abs(d)), (wire,))
    if mode != "rotation":
        raise InvalidArgument(f"error mode must be one of {ERROR_MODES}, got {mode!r}")
    if sigma_rotation < 0:
        raise InvalidArgument("sigma_rotation must be >= 0")
    angle, p1, p2 = sigma_rotation * rng.standard_normal(3)
    e1 = math.cos(angle) * complex(math.cos(p1), math.sin(p1))
    e2 = math.sin(angle) * complex(math.cos(p2), math.sin(p2))
    matrix = np.array([[e1.conjugate(), e2.conjugate()], [-e2, e1]])
    return GateMatrix(matrix, (wire,))


def gate_phase_wrap(gate: GateMatrix, sigma: float, rng: np.random.Generator) -> GateMatrix:
    """Attach an unknown Gaussian phase ``e^{i phi}`` to a gate."""
    phi = sigma * rng.standard_normal()
    return GateMatrix(gate.matrix, gate.wires, gate.phase + phi)


# -- phase random walk -------------------------------------------------------


@dataclass(frozen=True)
class PhaseWalkModel:
    step_size: float
    steps: int
    tau: float = 1.0

    def __post_init__(self):
        if self.steps < 0:
            raise InvalidArgument("steps must be >= 0")
        if self.step_size < 0:
            raise InvalidArgument("step_size must be >= 0")

    @property
    def variance(self) -> float:
        return self.steps * self.step_size**2

    @property
    def duration(self) -> float:
        return self.steps * self.tau

    def after(self, steps: int) -> PhaseWalkModel:
        return PhaseWalkModel(self.step_size, steps, self.tau)


def phase_walk_sample(model: PhaseWalkModel, rng: np.random.Generator, size=None):
    """Accumulated phase after ``model.steps`` Gaussian steps of std ``step_size``.

    Drawn as one Gaussian of std ``step_size * sqrt(steps)``.
    """
    if model.steps == 0:
        return 0.0 if size is None else np.zeros(size)
    return model.step_size * math.sqrt(model.steps) * rng.standard_normal(size)


def phase_walk_path(model: PhaseWalkModel, rng: np.random.Generator) -> np.ndarray:
    """Explicit walk: cumulative phase after each of the ``steps`` steps."""
    return np.cumsum(model.step_size * rng.standard_normal(model.steps))


def exceed_probability(model: PhaseWalkModel, threshold: float) -> float:
    """``P(|theta| > threshold)`` for the Gaussian walk after ``steps`` steps."""
    if model.variance == 0:
        return 0.0 if threshold >= 0 else 1.0
    return math.erfc(threshold / math.sqrt(2.0 * model.variance))


# -- decoherence -------------------------------------------------------------


@dataclass(frozen=True)
class DecoherenceModel:
    """Decoherence time ``t_d`` and decay rate ``lam`` for the decay-probability law."""

    t_d: float
    lam: float = 1.0

    def __post_init__(self):
        if not self.t_d > 0:
            raise InvalidArgument("t_d must be > 0")
        if not self.lam > 0:
            raise InvalidArgument("lambda must be > 0")


def single_characteristic(model: DecoherenceModel, t: float) -> float:
    return math.exp(-t / model.t_d)


def decoherence_characteristic(model: DecoherenceModel, t: float, n_qubits: int) -> float:
    """``exp(-t n / t_d)``, formed as the product of the n single-qubit factors."""
    if t < 0:
        raise InvalidArgument("t must be >= 0")
    if n_qubits < 1:
        raise InvalidArgument("n_qubits must be >= 1")
    single = single_characteristic(model, t)
    value = 1.0
    for _ in range(n_qubits):
        value *= single
    return value


def effective_decoherence_time(model: DecoherenceModel, n_qubits: int) -> float:
    return model.t_d / n_qubits


def decay_probability(model: DecoherenceModel, t: float) -> float:
    """``1 - lam * exp(-lam t)`` clamped to [0, 1]."""
    if t < 0:
        raise InvalidArgument("t must be >= 0")
    p = 1.0 - model.lam * math.exp(-model.lam * t)
    if p < 0.0 or p > 1.0:
        log.warning("decay probability %r at t=%r, lambda=%r clamped to [0, 1]", p, t, model.lam)
        p = min(1.0, max(0.0, p))
    return p


def amplitude_fraction(model: DecoherenceModel, t: float) -> float:
    """Fraction of the initial amplitude surviving at time ``t``: ``exp(-lam t)``."""
    return math.exp(-model.lam * t)


def dephasing_sigma(model: DecoherenceModel, dt: float) -> float:
    """Std of a Gaussian phase kick whose mean ``e^{i phi}`` is ``exp(-dt/t_d)``."""
    return math.sqrt(2.0 * dt / model.t_d)


def amplitude_decay(
    state: RegisterState, qubit: int, alpha: float, rng: np.random.Generator
) -> tuple[RegisterState, bool]:
    """One quantum-jump step of amplitude decay on ``qubit``.

    With probability ``(1 - alpha**2) * P(qubit=1)`` the qubit relaxes to
    ``|0>`` (jump); otherwise its ``|1>`` amplitudes are scaled by ``alpha``.
    The surviving branch is renormalized explicitly. Returns ``(state, jumped)``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidArgument("alpha must lie in [0, 1]")
    if not 0 <= qubit < state.n_qubits:
        raise InvalidArgument(f"qubit {qubit} out of range")
    amps = state.amplitudes.reshape(1 << qubit, 2, -1)
    p_one = float(np.sum(np.abs(amps[:, 1, :]) ** 2))
    p_jump = (1.0 - alpha**2) * p_one
    jumped = bool(rng.random() < p_jump)
    out = amps.copy()
    if jumped:
        out[:, 0, :] = amps[:, 1, :]
        out[:, 1, :] = 0.0
    else:
        out[:, 1, :] *= alpha
    out = out.reshape(-1)
    return RegisterState(state.n_qubits, out / np.linalg.norm(out)), jumped


# -- error-pattern statistics ------------------------------------------------

FAMILIES = ("bose_einstein", "fermi_dirac", "maxwell_boltzmann")


@dataclass(frozen=True)
class ErrorStatisticsModel:
    """``n_particles`` indistinguishable error objects spread over ``n_cells`` cells."""

    n_cells: int
    n_particles: int
    family: str = "bose_einstein"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgument(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.n_cells < 1 or self.n_particles < 0:
            raise InvalidArgument("need n_cells >= 1 and n_particles >= 0")
        if self.family == "fermi_dirac" and self.n_particles > self.n_cells:
            raise InvalidArgument("fermi_dirac needs n_particles <= n_cells")

    @property
    def n_patterns(self) -> int:
        if self.family == "fermi_dirac":
            return math.comb(self.n_cells, self.n_particles)
        return math.comb(self.n_cells + self.n_particles - 1, self.n_particles)


def _occupancy(cells: Sequence[int], n_cells: int) -> tuple[int, ...]:
    occ = [0] * n_cells
    for c in cells:
        occ[c] += 1
    return tuple(occ)


def pattern_space(model: ErrorStatisticsModel) -> list[tuple[int, ...]]:
    """All occupancy tuples the family can produce, in lexicographic cell order."""
    cells = range(model.n_cells)
    if model.family == "fermi_dirac":
        choices = itertools.combinations(cells, model.n_particles)
    else:
        choices = itertools.combinations_with_replacement(cells, model.n_particles)
    return [_occupancy(c, model.n_cells) for c in choices]


def _validate_pattern(model: ErrorStatisticsModel, pattern: Sequence[int]) -> tuple[int, ...]:
    pattern = tuple(int(k) for k in pattern)
    if len(pattern) != model.n_cells or any(k < 0 for k in pattern):
        raise InvalidPattern(f"pattern must be {model.n_cells} non-negative occupancies, got {pattern}")
    if sum(pattern) != model.n_particles:
        raise InvalidPattern(f"pattern holds {sum(pattern)} particles, expected {model.n_particles}")
    if model.family == "fermi_dirac" and any(k > 1 for k in pattern):
        raise InvalidPattern(f"fermi_dirac pattern has a multiply occupied cell: {pattern}")
    return pattern


def pattern_probability(model: ErrorStatisticsModel, pattern: Sequence[int]) -> Fraction:
    pattern = _validate_pattern(model, pattern)
    if model.family == "maxwell_boltzmann":
        ways = math.factorial(model.n_particles)
        for k in pattern:
            ways //= math.factorial(k)
        return Fraction(ways, model.n_cells**model.n_particles)
    return Fraction(1, model.n_patterns)


def sample_error_pattern(model: ErrorStatisticsModel, rng: np.random.Generator) -> tuple[int, ...]:
    n, cells = model.n_particles, model.n_cells
    if model.family == "maxwell_boltzmann":
        return _occupancy(rng.integers(0, cells, n).tolist(), cells)
    if model.family == "fermi_dirac":
        return _occupancy(rng.choice(cells, n, replace=False).tolist(), cells)
    # stars and bars: a uniform n-subset of n+cells-1 slots is a uniform multiset
    stars = np.sort(rng.choice(n + cells - 1, n, replace=False))
    return _occupancy((stars - np.arange(n)).tolist(), cells)


def pattern_errors(
    pattern: Sequence[int], sigma_rotation: float, rng: np.random.Generator, mode: str = "rotation"
) -> list[GateMatrix]:
    """One error unitary per occupied cell (cell index = qubit), composed
    ``k`` times for a cell holding ``k`` error objects."""
    gates = []
    for qubit, k in enumerate(pattern):
        if k == 0:
            continue
        matrix = np.eye(2, dtype=np.complex128)
        for _ in range(k):
            matrix = random_unitary_error(sigma_rotation, rng, qubit, mode).matrix @ matrix
        gates.append(GateMatrix(matrix, (qubit,)))
    return gates
