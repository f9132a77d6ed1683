import importlib

import numpy as np
import pytest

from qphase import _pykernels


def _backends():
    mods = [pytest.param(_pykernels, id="python")]
    try:
        mods.append(pytest.param(importlib.import_module("qphase._ckernels"), id="cython"))
    except ImportError:
        mods.append(pytest.param(None, id="cython", marks=pytest.mark.skip("extension not built")))
    return mods


@pytest.fixture(params=_backends())
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_state_vector(rng, n_qubits):
    v = rng.standard_normal(1 << n_qubits) + 1j * rng.standard_normal(1 << n_qubits)
    return v / np.linalg.norm(v)


def random_unitary(rng, dim):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def dense_operator(u, wires, n_qubits):
    """Full 2^n x 2^n matrix of a gate, built entry by entry from basis labels."""
    size = 1 << n_qubits
    k = len(wires)
    full = np.zeros((size, size), dtype=np.complex128)
    for col in range(size):
        bits = [(col >> (n_qubits - 1 - q)) & 1 for q in range(n_qubits)]
        sub_col = 0
        for w in wires:
            sub_col = (sub_col << 1) | bits[w]
        for sub_row in range(1 << k):
            out = list(bits)
            for j, w in enumerate(wires):
                out[w] = (sub_row >> (k - 1 - j)) & 1
            row = int("".join(map(str, out)), 2)
            full[row, col] += u[sub_row, sub_col]
    return full


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, detail = RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
