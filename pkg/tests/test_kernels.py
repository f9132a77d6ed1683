import os
import subprocess
import sys

import numpy as np
import pytest

from qphase import kernels
from conftest import dense_operator, random_state_vector, random_unitary


@pytest.mark.parametrize("n_qubits", [1, 2, 3, 5])
def test_apply_1q_matches_dense(backend, rng, n_qubits):
    for target in range(n_qubits):
        u = random_unitary(rng, 2)
        psi = random_state_vector(rng, n_qubits)
        expected = dense_operator(u, [target], n_qubits) @ psi
        amps = psi.copy()
        backend.apply_1q(amps, n_qubits, target, u)
        np.testing.assert_allclose(amps, expected, atol=1e-13)


@pytest.mark.parametrize("wires", [(0, 1), (1, 0), (0, 3), (3, 1), (2, 4), (4, 0)])
def test_apply_2q_matches_dense_nonadjacent(backend, rng, wires):
    n = 5
    u = random_unitary(rng, 4)
    psi = random_state_vector(rng, n)
    amps = psi.copy()
    backend.apply_2q(amps, n, wires[0], wires[1], u)
    np.testing.assert_allclose(amps, dense_operator(u, list(wires), n) @ psi, atol=1e-13)


def test_diffuse_matches_mean_form(backend, rng):
    psi = random_state_vector(rng, 6)
    amps = psi.copy()
    backend.diffuse(amps)
    np.testing.assert_allclose(amps, 2 * psi.mean() - psi, atol=1e-14)


def test_apply_phases(backend, rng):
    psi = random_state_vector(rng, 4)
    thetas = rng.uniform(-np.pi, np.pi, 16)
    amps = psi.copy()
    backend.apply_phases(amps, thetas)
    np.testing.assert_allclose(amps, np.exp(1j * thetas) * psi, atol=1e-14)


@pytest.mark.parametrize("xmask,zmask", [(0, 0), (0b101, 0), (0, 0b110), (0b011, 0b011), (0b111, 0b100)])
def test_apply_pauli_matches_dense(backend, rng, xmask, zmask):
    n = 3
    x = np.array([[0, 1], [1, 0]])
    z = np.diag([1, -1])
    op = np.eye(1)
    for q in range(n):
        bit = 1 << (n - 1 - q)
        single = np.eye(2)
        if zmask & bit:
            single = z @ single
        if xmask & bit:
            single = x @ single
        op = np.kron(op, single)
    psi = random_state_vector(rng, n)
    np.testing.assert_allclose(backend.apply_pauli(psi, xmask, zmask), op @ psi, atol=1e-14)


def test_backends_agree_on_large_register(rng):
    pytest.importorskip("qphase._ckernels")
    from qphase import _ckernels, _pykernels

    n = 14
    psi = random_state_vector(rng, n)
    u1, u2 = random_unitary(rng, 2), random_unitary(rng, 4)
    a, b = psi.copy(), psi.copy()
    for mod, amps in ((_ckernels, a), (_pykernels, b)):
        mod.apply_1q(amps, n, 7, u1)
        mod.apply_2q(amps, n, 13, 2, u2)
        mod.diffuse(amps)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_env_var_forces_python_backend():
    env = dict(os.environ, QPHASE_KERNELS="python")
    out = subprocess.run(
        [sys.executable, "-c", "import qphase.kernels as k; print(k.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_backend_name_is_known():
    assert kernels.BACKEND in ("cython", "python")
