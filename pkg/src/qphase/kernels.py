"""Kernel backend selection.

The compiled Cython kernels are used when importable; otherwise the numpy
versions. Set ``QPHASE_KERNELS=python`` to force the numpy path.
"""
import os

if os.environ.get("QPHASE_KERNELS", "").lower() == "python":
    from . import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _pykernels as _impl

        BACKEND = "python"

apply_1q = _impl.apply_1q
apply_2q = _impl.apply_2q
diffuse = _impl.diffuse
apply_phases = _impl.apply_phases
apply_pauli = _impl.apply_pauli

__all__ = ["BACKEND", "apply_1q", "apply_2q", "diffuse", "apply_phases", "apply_pauli"]
