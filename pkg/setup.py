"""Build script for the optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); a failed compile must therefore not fail the install.
"""

import sys

from setuptools import Extension, setup


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "hylm.kernels._compiled",
        ["src/hylm/kernels/_compiled.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


try:
    setup(ext_modules=extensions())
except SystemExit:
    raise
except Exception as exc:  # pragma: no cover - degraded install path
    print(f"warning: compiled kernels skipped ({exc}); using numpy backend", file=sys.stderr)
    setup(ext_modules=[])
