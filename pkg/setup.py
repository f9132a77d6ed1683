# Builds the optional Cython kernels. Without Cython or a C compiler the
# package installs without them and falls back to the numpy kernels.
from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "qphase._ckernels",
                ["src/qphase/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
