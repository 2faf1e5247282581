"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so a failed compile only costs speed. Set
RANGEMOS_REQUIRE_EXT=1 to turn a failed extension build into a hard error.
"""

import os
import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "rangemos.kernels._core",
                sources=["src/rangemos/kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )
except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
    if os.environ.get("RANGEMOS_REQUIRE_EXT"):
        raise
    print(f"rangemos: skipping compiled kernels ({exc}); numpy fallback will be used", file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
