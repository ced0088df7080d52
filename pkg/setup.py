"""Build script for the optional Cython kernel extension.

The package works without the extension (a pure-numpy fallback is
selected at import time), so compilation failures are non-fatal.
"""

import numpy
from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: kernel extension build failed, using pure-python fallback: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: building {ext.name} failed: {exc}")


def extensions():
    from Cython.Build import cythonize

    return cythonize(
        ["src/tjplan/spline/_kernels_cy.pyx"],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(
    ext_modules=extensions(),
    include_dirs=[numpy.get_include()],
    cmdclass={"build_ext": OptionalBuildExt},
)
