"""Build script for the compiled series core.

The package works without the extension (a NumPy fallback is selected at
import time), so failure to compile is tolerated: ``pip install`` with a
working C toolchain produces the fast path, anything else still yields a
usable install.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "sphframes._core",
                ["src/sphframes/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
