"""Build script: compiles the optional search-kernel extension.

The package is fully functional without the extension (a pure-Python
kernel with identical semantics is selected at import time); set
CORRSCHED_PURE_PYTHON=1 to skip compilation entirely.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"warning: compiled search kernel not built ({exc}); "
            "the pure-Python kernel will be used",
            file=sys.stderr,
        )


ext_modules = []
cmdclass = {}
if not os.environ.get("CORRSCHED_PURE_PYTHON"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "corrsched._kernels._search",
                    ["src/corrsched/_kernels/_search.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
        cmdclass = {"build_ext": optional_build_ext}
    except ImportError as exc:
        print(f"warning: {exc}; building without the compiled kernel", file=sys.stderr)

setup(ext_modules=ext_modules, cmdclass=cmdclass)
