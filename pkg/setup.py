"""Build script: compiles the optional Cython split kernel.

The package works without the extension (a numpy fallback is selected at
import time), so build failures here degrade to a warning instead of
aborting the install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """build_ext that tolerates a missing compiler toolchain."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any toolchain failure
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"WARNING: building the compiled split kernel failed ({exc}); "
            "pielab will fall back to the pure-Python kernel.",
            file=sys.stderr,
        )


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"WARNING: {exc}; skipping compiled kernel.", file=sys.stderr)
        return []
    ext = Extension(
        "pielab._kernels._tree_cy",
        ["src/pielab/_kernels/_tree_cy.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
