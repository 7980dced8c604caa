"""Build script for the optional compiled kernels.

The extension is optional: when Cython or a compiler is unavailable the
package installs without it and falls back to the pure-Python kernels.
"""
import os

import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

PYX = os.path.join("src", "hypergibbs", "_ckernels.pyx")
C_SRC = os.path.join("src", "hypergibbs", "_ckernels.c")


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing or broken
            print(f"warning: compiled kernels not built ({exc}); using pure Python")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); using pure Python")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None and os.path.exists(PYX):
        ext = Extension("hypergibbs._ckernels", [PYX], include_dirs=[numpy.get_include()],
                        extra_compile_args=["-O3", "-ffp-contract=off"])
        return cythonize([ext], language_level=3,
                         compiler_directives={"boundscheck": False, "wraparound": False,
                                              "cdivision": True, "initializedcheck": False})
    if os.path.exists(C_SRC):
        return [Extension("hypergibbs._ckernels", [C_SRC], include_dirs=[numpy.get_include()])]
    return []


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
