"""Build script: compiles the optional Cython kernel core.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile downgrades to a warning instead of
aborting the install.
"""

import sys

from setuptools import setup


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as exc:
        print(f"mtsc: Cython/numpy unavailable ({exc}); building without the "
              "compiled kernel core", file=sys.stderr)
        return []
    ext = Extension(
        "mtsc._kernels._core",
        ["src/mtsc/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


try:
    setup(ext_modules=extensions())
except SystemExit:
    raise
except Exception as exc:  # compiler missing, broken toolchain, ...
    print(f"mtsc: extension build failed ({exc}); installing with the numpy "
          "fallback kernels only", file=sys.stderr)
    setup(ext_modules=[])
