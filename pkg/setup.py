"""Build the optional Cython kernels.

If Cython or a C compiler is unavailable the package still installs and
falls back to the numpy kernels in ``svhmc._pykernels``.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SVHMC_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "svhmc._kernels",
                    ["src/svhmc/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
