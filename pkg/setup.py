"""Build script: compiles the optional Cython stepping kernels.

The package works without compiled extensions (a pure-numpy fallback is
selected at import time), so a failed extension build only costs speed.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/degenlab/_speedups.pyx"],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
    include_dirs = [numpy.get_include()]
    for ext in ext_modules:
        ext.name = "degenlab._speedups"
        ext.include_dirs = include_dirs
        ext.optional = True
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"degenlab: skipping Cython extension build ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
