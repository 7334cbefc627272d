"""Build script: compiles the optional simplex pivot kernel.

The package is pure Python except for one Cython extension holding the
dense-tableau pivot loop.  If Cython or a C compiler is unavailable the
build falls back to the pure-Python kernel selected at import time.
"""

from setuptools import setup
from setuptools.errors import CCompilerError, ExecError, PlatformError

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        ["src/netdes_cuts/simplex/_pivot_cy.pyx"],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
except ImportError:
    extensions = []


def run_setup(with_ext):
    setup(ext_modules=extensions if with_ext else [])


try:
    run_setup(bool(extensions))
except (CCompilerError, ExecError, PlatformError):
    # no compiler: install anyway, pure-Python kernel takes over
    run_setup(False)
