"""Build script: compiles the optional Cython kernel core.

The package works without the extension (a pure-Python kernel module is
selected at import time), so any failure here degrades to the slow path
instead of breaking the install. Set CCEAD_PURE_ONLY=1 to skip the
extension build entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("CCEAD_PURE_ONLY") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "ccead.tensor.ckernels",
                    ["src/ccead/tensor/ckernels.pyx"],
                    # no -ffast-math: the compiled and pure backends must
                    # agree bitwise (same IEEE operation order).
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "initializedcheck": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
