"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure-Python fallback is selected at
import time); building it makes parameter sweeps and norm bisections roughly two
orders of magnitude faster.  See benchmarks/bench_backends.py.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("qsyn.mat._speedups", ["src/qsyn/mat/_speedups.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:  # no Cython at build time: install pure-Python only
    extensions = []

setup(ext_modules=extensions)
