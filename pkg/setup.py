"""Optional compiled kernels.

The package is pure Python plus one Cython extension with hot loops
(denominator-cleared badness scans, naive box scans).  If Cython or a C
compiler is unavailable the build falls through to the pure-Python kernels
selected at import time in badlab.kernels.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "badlab.kernels._cykernels",
                ["src/badlab/kernels/_cykernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
