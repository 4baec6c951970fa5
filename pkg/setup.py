"""Build script.

The compiled series kernels are optional: if Cython (or a C compiler) is
unavailable the package installs pure-Python and selects the numpy backend
at import time.  Set QUADRHO_NO_EXT=1 to skip the extension build.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("QUADRHO_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "quadrho._kernels._series_cy",
                    ["src/quadrho/_kernels/_series_cy.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
