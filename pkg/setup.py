"""Build script: compiles the optional Gibbs-sweep extension.

The package works without the extension (a pure-numpy kernel is selected at
import time), so a failed compile only costs speed.
"""

import sys

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "tsec._kernel._speedups",
                ["src/tsec/_kernel/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"tsec: skipping compiled kernel ({exc}); using pure-python fallback", file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
