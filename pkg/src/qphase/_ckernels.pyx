# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled state-vector kernels.

Every kernel mutates ``amps`` (a C-contiguous complex128 vector of length
``2**n_qubits``) in place, except :func:`apply_pauli` which returns a new
vector. Qubit 0 is the most significant bit of the basis index.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


cdef inline double[::1] _interleaved(double complex[::1] amps):
    # same memory, viewed as re, im, re, im, ...
    return np.asarray(amps).view(np.float64)


def apply_1q(double complex[::1] amps, int n_qubits, int target, u):
    cdef double complex u00 = u[0, 0], u01 = u[0, 1], u10 = u[1, 0], u11 = u[1, 1]
    cdef double r00 = u00.real, j00 = u00.imag, r01 = u01.real, j01 = u01.imag
    cdef double r10 = u10.real, j10 = u10.imag, r11 = u11.real, j11 = u11.imag
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << (n_qubits - 1 - target)
    cdef Py_ssize_t size = amps.shape[0]
    cdef double[::1] d = _interleaved(amps)
    cdef Py_ssize_t blk, base, j, i0, i1
    cdef double x0, y0, x1, y1
    with nogil:
        for blk in range(size // (2 * stride)):
            base = blk * 2 * stride
            for j in range(stride):
                i0 = 2 * (base + j)
                i1 = i0 + 2 * stride
                x0 = d[i0]
                y0 = d[i0 + 1]
                x1 = d[i1]
                y1 = d[i1 + 1]
                d[i0] = r00 * x0 - j00 * y0 + r01 * x1 - j01 * y1
                d[i0 + 1] = r00 * y0 + j00 * x0 + r01 * y1 + j01 * x1
                d[i1] = r10 * x0 - j10 * y0 + r11 * x1 - j11 * y1
                d[i1 + 1] = r10 * y0 + j10 * x0 + r11 * y1 + j11 * x1


def apply_2q(double complex[::1] amps, int n_qubits, int wire0, int wire1, u):
    cdef const double[:, ::1] m = np.ascontiguousarray(u, dtype=np.complex128).view(np.float64)
    cdef Py_ssize_t s0 = (<Py_ssize_t>1) << (n_qubits - 1 - wire0)
    cdef Py_ssize_t s1 = (<Py_ssize_t>1) << (n_qubits - 1 - wire1)
    cdef Py_ssize_t lo = s0 if s0 < s1 else s1
    cdef Py_ssize_t hi = s1 if s0 < s1 else s0
    cdef Py_ssize_t size = amps.shape[0]
    cdef double[::1] d = _interleaved(amps)
    cdef Py_ssize_t ob, mb, outer, mid, j, base, r, c
    cdef Py_ssize_t idx[4]
    cdef double x[4]
    cdef double y[4]
    cdef double accx, accy, mr, mi
    with nogil:
        # base runs over indices with zero bits at positions lo and hi
        for ob in range(size // (2 * hi)):
            outer = ob * 2 * hi
            for mb in range(hi // (2 * lo)):
                mid = outer + mb * 2 * lo
                for j in range(lo):
                    base = mid + j
                    idx[0] = 2 * base
                    idx[1] = 2 * (base + s1)
                    idx[2] = 2 * (base + s0)
                    idx[3] = 2 * (base + s0 + s1)
                    for r in range(4):
                        x[r] = d[idx[r]]
                        y[r] = d[idx[r] + 1]
                    for r in range(4):
                        accx = 0.0
                        accy = 0.0
                        for c in range(4):
                            mr = m[r, 2 * c]
                            mi = m[r, 2 * c + 1]
                            accx = accx + mr * x[c] - mi * y[c]
                            accy = accy + mr * y[c] + mi * x[c]
                        d[idx[r]] = accx
                        d[idx[r] + 1] = accy


cdef double complex _tree_sum(const double complex[::1] amps):
    # pairwise halving: exact for equal entries when the length is a power of two
    cdef Py_ssize_t k, size = amps.shape[0], half
    if size == 0:
        return 0
    buf_arr = np.array(amps, dtype=np.complex128)
    cdef double complex[::1] buf = buf_arr
    while size > 1:
        half = size >> 1
        for k in range(half):
            buf[k] = buf[k] + buf[k + half]
        if size & 1:
            buf[0] = buf[0] + buf[size - 1]
        size = half
    return buf[0]


def diffuse(double complex[::1] amps):
    cdef Py_ssize_t k, size = amps.shape[0]
    cdef double complex twice_mean = 2.0 * _tree_sum(amps) / size
    for k in range(size):
        amps[k] = twice_mean - amps[k]


def apply_phases(double complex[::1] amps, const double[::1] thetas):
    cdef Py_ssize_t k, size = amps.shape[0]
    cdef double t
    for k in range(size):
        t = thetas[k]
        amps[k] = amps[k] * (cos(t) + 1j * sin(t))


def apply_pauli(const double complex[::1] amps, Py_ssize_t xmask, Py_ssize_t zmask):
    cdef Py_ssize_t k, size = amps.shape[0]
    out_arr = np.empty(size, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t bits
    cdef int parity
    for k in range(size):
        bits = k & zmask
        parity = 0
        while bits:
            bits &= bits - 1
            parity ^= 1
        if parity:
            out[k ^ xmask] = -amps[k]
        else:
            out[k ^ xmask] = amps[k]
    return out_arr
