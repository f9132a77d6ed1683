"""Shor 9-qubit and Steane 7-qubit codes on the state-vector simulator.

Syndromes come from projective measurement of X-type and Z-type parity
checks directly on the state vector, with no ancilla circuits. The decoder
is a per-sector lookup table built by enumerating single flips.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import DegenerateMeasurement, InvalidArgument, UncorrectableSyndrome
from .noise import random_unitary_error
from .statevec import (
    COMPONENT_THRESHOLD,
    PAULI_X,
    PAULI_Z,
    GateMatrix,
    RegisterState,
    apply_gate,
    component_count,
    fidelity,
    from_amplitudes,
)

ORTHO_TOL = 1e-12
# a projected branch with squared norm below this is treated as impossible
BRANCH_EPS = 1e-28

STEANE_ZERO = (
    "0000000", "0001111", "0110011", "0111100",
    "1010101", "1011010", "1100110", "1101001",
)
STEANE_ONE = (
    "1111111", "1110000", "1001100", "1000011",
    "0101010", "0100101", "0011001", "0010110",
)


@dataclass(frozen=True)
class Check:
    """Parity check: tensor product of X (or Z) on ``qubits``."""

    kind: str
    qubits: tuple[int, ...]

    def masks(self, n_qubits: int) -> tuple[int, int]:
        mask = sum(1 << (n_qubits - 1 - q) for q in self.qubits)
        return (mask, 0) if self.kind == "X" else (0, mask)

    def detects(self) -> str:
        return "Z" if self.kind == "X" else "X"

    def __str__(self):
        return self.kind + "".join(str(q) for q in self.qubits)


@dataclass(frozen=True, eq=False)
class CodeSpec:
    name: str
    n_physical: int
    zero: np.ndarray
    one: np.ndarray
    checks: tuple[Check, ...]
    sectors: tuple[tuple[int, ...], ...]
    syndrome_table: dict = field(repr=False)

    def codeword(self, bit: int) -> RegisterState:
        return RegisterState(self.n_physical, self.one if bit else self.zero)

    @property
    def n_checks(self) -> int:
        return len(self.checks)


def _pauli_apply(amps: np.ndarray, n_qubits: int, check: Check) -> np.ndarray:
    xmask, zmask = check.masks(n_qubits)
    return kernels.apply_pauli(np.ascontiguousarray(amps), xmask, zmask)


def _sector_table(checks: Sequence[Check], sector: Sequence[int], n_physical: int) -> dict:
    kinds = {checks[i].kind for i in sector}
    if len(kinds) != 1:
        raise InvalidArgument("a decoding sector must hold checks of one kind")
    error_kind = checks[sector[0]].detects()
    support = sorted({q for i in sector for q in checks[i].qubits})
    table = {tuple(0 for _ in sector): ()}
    for q in support:
        bits = tuple(int(q in checks[i].qubits) for i in sector)
        table.setdefault(bits, ((error_kind, q),))
    return table


def _build_table(checks: Sequence[Check], sectors, n_physical: int) -> dict:
    per_sector = [_sector_table(checks, s, n_physical) for s in sectors]
    table = {}
    for combo in itertools.product(*(t.items() for t in per_sector)):
        syndrome = [0] * len(checks)
        corrections = []
        for sector, (bits, fix) in zip(sectors, combo):
            for i, b in zip(sector, bits):
                syndrome[i] = b
            corrections.extend(fix)
        table[tuple(syndrome)] = tuple(corrections)
    return table


def _validate_code(code: CodeSpec) -> None:
    zero, one = code.zero, code.one
    for name, vec in (("|0>", zero), ("|1>", one)):
        if abs(np.vdot(vec, vec).real - 1.0) > ORTHO_TOL:
            raise InvalidArgument(f"{code.name} codeword {name} is not normalized")
    if abs(np.vdot(zero, one)) > ORTHO_TOL:
        raise InvalidArgument(f"{code.name} codewords are not orthogonal")
    for a, b in itertools.combinations(code.checks, 2):
        if a.kind != b.kind and len(set(a.qubits) & set(b.qubits)) % 2:
            raise InvalidArgument(f"checks {a} and {b} anticommute")
    for check in code.checks:
        for vec in (zero, one):
            if np.max(np.abs(_pauli_apply(vec, code.n_physical, check) - vec)) > ORTHO_TOL:
                raise InvalidArgument(f"check {check} does not fix the {code.name} codewords")


def _make_code(name, n, zero, one, checks, sectors) -> CodeSpec:
    zero = np.asarray(zero, dtype=np.complex128)
    one = np.asarray(one, dtype=np.complex128)
    zero.flags.writeable = False
    one.flags.writeable = False
    code = CodeSpec(name, n, zero, one, tuple(checks), tuple(sectors), _build_table(checks, sectors, n))
    _validate_code(code)
    return code


def bits_to_index(bits: str) -> int:
    return int(bits, 2)


def _superposition(strings: Iterable[str], n: int) -> np.ndarray:
    strings = list(strings)
    amps = np.zeros(1 << n, dtype=np.complex128)
    for s in strings:
        amps[bits_to_index(s)] = 1.0 / math.sqrt(len(strings))
    return amps


def gf2_row_basis(rows: Iterable[Sequence[int]]) -> np.ndarray:
    """Reduced row-echelon basis of the GF(2) span of ``rows``."""
    m = np.array([list(r) for r in rows], dtype=np.uint8) % 2
    basis_rows, pivot_row = [], 0
    for col in range(m.shape[1]):
        candidates = np.nonzero(m[pivot_row:, col])[0]
        if candidates.size == 0:
            continue
        r = pivot_row + candidates[0]
        m[[pivot_row, r]] = m[[r, pivot_row]]
        for other in range(m.shape[0]):
            if other != pivot_row and m[other, col]:
                m[other] ^= m[pivot_row]
        pivot_row += 1
        if pivot_row == m.shape[0]:
            break
    basis_rows = m[:pivot_row]
    return basis_rows


def steane_check_matrix() -> np.ndarray:
    """3x7 parity-check rows spanning the support strings of the Steane ``|0>``."""
    return gf2_row_basis([[int(c) for c in s] for s in STEANE_ZERO])


def shor_code() -> CodeSpec:
    n = 9
    zero = np.zeros(1 << n, dtype=np.complex128)
    one = np.zeros(1 << n, dtype=np.complex128)
    norm = 1.0 / (2.0 * math.sqrt(2.0))
    for blocks in itertools.product(("000", "111"), repeat=3):
        idx = bits_to_index("".join(blocks))
        zero[idx] = norm
        one[idx] = norm * (-1) ** sum(b == "111" for b in blocks)
    checks = [
        Check("Z", (0, 1)), Check("Z", (1, 2)),
        Check("Z", (3, 4)), Check("Z", (4, 5)),
        Check("Z", (6, 7)), Check("Z", (7, 8)),
        Check("X", (0, 1, 2, 3, 4, 5)), Check("X", (3, 4, 5, 6, 7, 8)),
    ]
    sectors = [(0, 1), (2, 3), (4, 5), (6, 7)]
    return _make_code("shor9", n, zero, one, checks, sectors)


def steane_code() -> CodeSpec:
    n = 7
    rows = steane_check_matrix()
    supports = [tuple(int(q) for q in np.nonzero(r)[0]) for r in rows]
    checks = [Check("Z", s) for s in supports] + [Check("X", s) for s in supports]
    k = len(supports)
    sectors = [tuple(range(k)), tuple(range(k, 2 * k))]
    return _make_code("steane7", n, _superposition(STEANE_ZERO, n), _superposition(STEANE_ONE, n), checks, sectors)


_CODES = {"shor9": shor_code, "steane7": steane_code}


def get_code(name: str) -> CodeSpec:
    try:
        return _CODES[name]()
    except KeyError:
        raise InvalidArgument(f"unknown code {name!r}; choose from {sorted(_CODES)}") from None


def _as_logical(logical) -> RegisterState:
    if isinstance(logical, RegisterState):
        if logical.n_qubits != 1:
            raise InvalidArgument("logical input must be a 1-qubit state")
        return logical
    return from_amplitudes(logical)


def encode(code: CodeSpec, logical) -> RegisterState:
    """Map ``a|0> + b|1>`` to ``a|0_L> + b|1_L>``; accepts a 1-qubit state or ``(a, b)``."""
    a, b = _as_logical(logical).amplitudes
    return RegisterState(code.n_physical, a * code.zero + b * code.one)


def logical_amplitudes(code: CodeSpec, state: RegisterState) -> tuple[complex, complex]:
    amps = state.amplitudes
    return complex(np.vdot(code.zero, amps)), complex(np.vdot(code.one, amps))


# -- flip errors ---------------------------------------------------------------

FLIP_KINDS = ("bit_flip", "phase_flip", "both")
_FLIP_MATRICES = {
    "bit_flip": PAULI_X,
    "phase_flip": PAULI_Z,
    # Z first, then X: (a, b) -> (-b, a)
    "both": PAULI_X @ PAULI_Z,
}


@dataclass(frozen=True)
class FlipError:
    kind: str
    qubit: int

    def __post_init__(self):
        if self.kind not in FLIP_KINDS:
            raise InvalidArgument(f"flip kind must be one of {FLIP_KINDS}, got {self.kind!r}")
        if self.qubit < 0:
            raise InvalidArgument("qubit index must be >= 0")

    def gate(self) -> GateMatrix:
        return GateMatrix(_FLIP_MATRICES[self.kind], (self.qubit,))

    def __str__(self):
        return f"{self.kind}@{self.qubit}"


def apply_flip_error(state: RegisterState, error: FlipError) -> RegisterState:
    if error.qubit >= state.n_qubits:
        raise InvalidArgument(f"qubit {error.qubit} out of range for {state.n_qubits} qubits")
    return apply_gate(state, error.gate())


def all_single_flips(code: CodeSpec) -> list[FlipError]:
    return [FlipError(kind, q) for kind in FLIP_KINDS for q in range(code.n_physical)]


# -- syndrome extraction and correction --------------------------------------


def _project(amps: np.ndarray, n: int, check: Check) -> tuple[np.ndarray, np.ndarray]:
    flipped = _pauli_apply(amps, n, check)
    return (amps + flipped) / 2.0, (amps - flipped) / 2.0


def _norm2(v: np.ndarray) -> float:
    return float(np.vdot(v, v).real)


def extract_syndrome(
    code: CodeSpec, state: RegisterState, rng: np.random.Generator | None = None
) -> tuple[tuple[int, ...], RegisterState]:
    """Measure every check in order and return ``(bits, projected state)``.

    Bit 1 means outcome -1. For the Steane code the three Z checks give the
    bit-flip syndrome and the three X checks (the same parities in the
    Hadamard-rotated basis) give the phase-flip syndrome. ``rng`` is needed
    only when an outcome is genuinely random.
    """
    if state.n_qubits != code.n_physical:
        raise InvalidArgument(f"{code.name} needs {code.n_physical} qubits, got {state.n_qubits}")
    amps = state.amps
    bits = []
    for check in code.checks:
        plus, minus = _project(amps, code.n_physical, check)
        p_plus, p_minus = _norm2(plus), _norm2(minus)
        if p_minus <= BRANCH_EPS:
            outcome = 0
        elif p_plus <= BRANCH_EPS:
            outcome = 1
        elif rng is None:
            raise InvalidArgument(f"outcome of check {check} is random; pass a generator")
        else:
            outcome = int(rng.random() * (p_plus + p_minus) >= p_plus)
        branch, p = (minus, p_minus) if outcome else (plus, p_plus)
        if p <= BRANCH_EPS:
            raise DegenerateMeasurement(f"check {check} projected onto a zero-norm branch")
        amps = branch / math.sqrt(p)
        bits.append(outcome)
    return tuple(bits), RegisterState(code.n_physical, amps, state.phase)


def syndrome_branches(code: CodeSpec, state: RegisterState) -> list[tuple[tuple[int, ...], float, RegisterState]]:
    """Every syndrome outcome with non-negligible probability, its
    probability and the normalized post-measurement state."""
    branches = [((), 1.0, state.amps)]
    for check in code.checks:
        nxt = []
        for bits, p, amps in branches:
            for outcome, part in enumerate(_project(amps, code.n_physical, check)):
                q = _norm2(part)
                if q > BRANCH_EPS:
                    nxt.append((bits + (outcome,), p * q, part / math.sqrt(q)))
        branches = nxt
    return [(bits, p, RegisterState(code.n_physical, amps, state.phase)) for bits, p, amps in branches]


def correction_for(code: CodeSpec, syndrome: Sequence[int]) -> tuple[tuple[str, int], ...]:
    key = tuple(int(b) for b in syndrome)
    try:
        return code.syndrome_table[key]
    except KeyError:
        raise UncorrectableSyndrome(f"{code.name}: no correction for syndrome {key}") from None


def correct(code: CodeSpec, state: RegisterState, syndrome: Sequence[int]) -> RegisterState:
    amps = state.amps
    for kind, q in correction_for(code, syndrome):
        amps = _pauli_apply(amps, code.n_physical, Check(kind, (q,)))
    return RegisterState(code.n_physical, amps, state.phase)


def recover(code: CodeSpec, state: RegisterState, rng: np.random.Generator | None = None):
    """Extract a syndrome and apply its correction; returns ``(syndrome, state)``."""
    syndrome, projected = extract_syndrome(code, state, rng)
    return syndrome, correct(code, projected, syndrome)


def _in_code_space(code: CodeSpec, state: RegisterState, tol: float = 1e-9) -> bool:
    return all(np.max(np.abs(_pauli_apply(state.amps, code.n_physical, c) - state.amps)) < tol for c in code.checks)


def expected_recovery_fidelity(code: CodeSpec, state: RegisterState, ideal: RegisterState) -> float:
    """Fidelity with ``ideal`` after correction, averaged over all syndrome outcomes.

    For a codeword ``ideal`` each correction ``C_s`` maps it into syndrome
    sector ``s``, so the average reduces to ``sum_s |<C_s ideal|state>|^2``.
    Otherwise the branches are enumerated.
    """
    if state.n_qubits != code.n_physical or ideal.n_qubits != code.n_physical:
        raise InvalidArgument(f"{code.name} acts on {code.n_physical} qubits")
    if not _in_code_space(code, ideal):
        return branch_average_fidelity(code, state, ideal)
    total = 0.0
    for bits in code.syndrome_table:
        overlap = np.vdot(correct(code, ideal, bits).amps, state.amps)
        total += overlap.real**2 + overlap.imag**2
    return min(1.0, float(total))


def branch_average_fidelity(code: CodeSpec, state: RegisterState, ideal: RegisterState) -> float:
    """Same average as :func:`expected_recovery_fidelity`, by explicit projection
    onto every syndrome branch."""
    return sum(p * fidelity(correct(code, s, bits), ideal) for bits, p, s in syndrome_branches(code, state))


# -- analog stress -------------------------------------------------------------


@dataclass
class QecTrialRecord:
    error_description: str
    syndrome_bits: tuple[int, ...]
    corrected: bool
    fidelity_after: float
    component_count_after: int
    residual_infidelity: float
    # 1 - fidelity averaged over every syndrome outcome (the channel output)
    expected_residual: float | None = None

    @property
    def syndrome_str(self) -> str:
        return "".join(str(b) for b in self.syndrome_bits)


RECOVERY_TOL = 1e-10


def _record(code, errored, ideal, rng, description, threshold, averaged=False) -> QecTrialRecord:
    components = component_count(errored, threshold)
    expected = max(0.0, 1.0 - float(expected_recovery_fidelity(code, errored, ideal))) if averaged else None
    syndrome, corrected = recover(code, errored, rng)
    fid = fidelity(corrected, ideal)
    return QecTrialRecord(description, syndrome, fid >= 1.0 - RECOVERY_TOL, fid, components, 1.0 - fid, expected)


def analog_trial(
    code: CodeSpec,
    sigma_rotation: float,
    rng: np.random.Generator,
    logical=(0.6, 0.8),
    mode: str = "rotation",
    threshold: float = COMPONENT_THRESHOLD,
) -> QecTrialRecord:
    """Encode, hit every physical qubit with an independent random unitary,
    then correct. Components are counted before the syndrome projection.

    The record carries both the residual of the sampled syndrome branch and
    the residual averaged over all branches. They share a mean, but the
    sampled one is heavy-tailed because rare syndrome hits dominate it.
    """
    ideal = encode(code, logical)
    errored = ideal
    for q in range(code.n_physical):
        errored = apply_gate(errored, random_unitary_error(sigma_rotation, rng, q, mode))
    return _record(code, errored, ideal, rng, f"{mode}(sigma={sigma_rotation:g}) on all qubits", threshold, True)


@dataclass
class StressSummary:
    sigma: float
    records: list[QecTrialRecord]

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.residual_infidelity for r in self.records])

    @property
    def mean_residual(self) -> float:
        return float(self.residuals.mean())

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())

    @property
    def expected_residuals(self) -> np.ndarray:
        return np.array([r.expected_residual for r in self.records], dtype=float)

    @property
    def mean_expected_residual(self) -> float:
        return float(self.expected_residuals.mean())

    def confidence_interval(self, z: float = 1.96, averaged: bool = False) -> tuple[float, float]:
        res = self.expected_residuals if averaged else self.residuals
        mean = float(res.mean())
        half = z * res.std(ddof=1) / math.sqrt(res.size) if res.size > 1 else 0.0
        return mean - half, mean + half

    def component_histogram(self) -> dict[int, int]:
        counts = np.array([r.component_count_after for r in self.records])
        values, freq = np.unique(counts, return_counts=True)
        return {int(v): int(f) for v, f in zip(values, freq)}


def analog_stress(
    code: CodeSpec,
    sigma_rotation: float,
    trials: int,
    rng: np.random.Generator,
    logical=(0.6, 0.8),
    mode: str = "rotation",
    threshold: float = COMPONENT_THRESHOLD,
) -> StressSummary:
    if trials < 1:
        raise InvalidArgument("trials must be >= 1")
    if sigma_rotation < 0:
        raise InvalidArgument("sigma_rotation must be >= 0")
    records = [analog_trial(code, sigma_rotation, rng, logical, mode, threshold) for _ in range(trials)]
    return StressSummary(sigma_rotation, records)


def decay_error(gamma: float, rng: np.random.Generator, wire: int) -> GateMatrix:
    """Rotation by ``arcsin(sqrt(gamma))`` followed by a random relative phase."""
    if not 0.0 <= gamma <= 1.0:
        raise InvalidArgument("gamma must lie in [0, 1]")
    angle = math.asin(math.sqrt(gamma))
    phi = rng.uniform(0.0, 2.0 * math.pi)
    rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    return GateMatrix(np.diag([1.0, np.exp(1j * phi)]) @ rot, (wire,))


def shor_single_decoherence_demo(
    gamma: float, qubit, rng: np.random.Generator, logical=(0.6, 0.8)
) -> QecTrialRecord:
    """Decay-style error on one qubit (or each qubit in a sequence) of a
    Shor codeword, then syndrome extraction and correction."""
    code = shor_code()
    qubits = [qubit] if isinstance(qubit, (int, np.integer)) else list(qubit)
    if any(not 0 <= q < code.n_physical for q in qubits):
        raise InvalidArgument(f"qubits {qubits} out of range 0..8")
    ideal = encode(code, logical)
    errored = ideal
    for q in qubits:
        errored = apply_gate(errored, decay_error(gamma, rng, q))
    return _record(code, errored, ideal, rng, f"decay(gamma={gamma:g}) on qubits {qubits}", COMPONENT_THRESHOLD)
