"""Numpy implementations of the state-vector kernels.

Same signatures and in-place semantics as the compiled ``_ckernels`` module;
used when the extension is not built or ``QPHASE_KERNELS=python`` is set.
"""
import numpy as np


def apply_1q(amps, n_qubits, target, u):
    view = amps.reshape(1 << target, 2, 1 << (n_qubits - 1 - target))
    view[:] = np.einsum("ij,ajb->aib", u, view)


def apply_2q(amps, n_qubits, wire0, wire1, u):
    tensor = amps.reshape((2,) * n_qubits)
    moved = np.moveaxis(tensor, (wire0, wire1), (0, 1))
    out = np.tensordot(u.reshape(2, 2, 2, 2), moved, axes=([2, 3], [0, 1]))
    amps[:] = np.moveaxis(out, (0, 1), (wire0, wire1)).reshape(-1)


def _tree_sum(amps):
    # pairwise halving: exact for equal entries when the length is a power of two
    buf = amps.copy()
    size = buf.shape[0]
    while size > 1:
        half = size >> 1
        buf[:half] += buf[half:2 * half]
        if size & 1:
            buf[0] += buf[size - 1]
        size = half
    return buf[0]


def diffuse(amps):
    twice_mean = 2.0 * _tree_sum(amps) / amps.shape[0]
    np.subtract(twice_mean, amps, out=amps)


def apply_phases(amps, thetas):
    amps *= np.cos(thetas) + 1j * np.sin(thetas)


def _parity(values):
    values = values.copy()
    parity = np.zeros_like(values)
    while values.any():
        parity ^= values & 1
        values >>= 1
    return parity


def apply_pauli(amps, xmask, zmask):
    idx = np.arange(amps.shape[0], dtype=np.int64)
    signs = 1 - 2 * _parity(idx & zmask)
    out = np.empty_like(amps)
    out[idx ^ xmask] = signs * amps
    return out
