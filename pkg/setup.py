"""Build hook for the optional compiled kernel extension.

The package is fully functional without the extension: edgesched._kernels
falls back to pure-Python twins at import time. Set EDGESCHED_SKIP_NATIVE=1
to skip compilation entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class _OptionalBuildExt(build_ext):
    """Build the extension if we can, otherwise install pure-Python only."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain
            print(f"warning: skipping native kernels ({exc}); using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); using pure-Python fallback")


def _extensions():
    if os.environ.get("EDGESCHED_SKIP_NATIVE"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "edgesched._kernels._native",
        ["src/edgesched/_kernels/_native.pyx"],
        # -ffp-contract=off keeps C double arithmetic bit-identical with the
        # pure-Python twins (no FMA contraction). Do not add -ffast-math.
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": _OptionalBuildExt},
)
