"""Build the optional compiled kernels.

The package works without them; ``resetsearch._kernels`` falls back to the
pure-Python implementation when the extension is missing.
"""
import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("RESETSEARCH_PURE_PYTHON", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        openmp = [] if sys.platform == "darwin" else ["-fopenmp"]
        ext_modules = cythonize(
            [
                Extension(
                    "resetsearch._kernels._core",
                    ["src/resetsearch/_kernels/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-ffp-contract=off"] + openmp,
                    extra_link_args=openmp,
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3", "boundscheck": False,
                                 "wraparound": False, "cdivision": True},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
