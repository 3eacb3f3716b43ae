"""Builds the optional compiled kernels; the package falls back to numpy when they are absent."""
import os

import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    # A missing compiler must not break installation: the pure-Python path covers every kernel.
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            self.warn(f"compiled kernels not built ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self.warn(f"failed to build {ext.name} ({exc}); using numpy fallback")


def extensions():
    if os.environ.get("BDA_NO_EXTENSIONS"):
        return []
    from Cython.Build import cythonize

    ext = Extension(
        name="balanced_da._ckernels",
        sources=["src/balanced_da/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        # no -ffast-math / FMA contraction: results must match the numpy fallback bit for bit
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
