"""Build script: compiles the optional fast-kernel extension.

The package works without the extension (a pure-Python fallback is selected
at import time). Set CHAOSRNG_NO_EXT=1 to skip compilation entirely.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("CHAOSRNG_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "chaosrng._fastkernels",
                    ["src/chaosrng/_fastkernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
