"""Build script for the optional compiled fast-marching kernel.

The package works without the extension (a pure-Python kernel is selected at
import time), so a failed compile only costs speed.
"""

import os

from setuptools import setup, Extension

PYX = "src/rototrack/fastmarch/_core.pyx"

ext_modules = []
try:
    if not os.path.exists(PYX):
        raise ImportError("kernel source not present")
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rototrack.fastmarch._core",
                sources=[PYX],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
