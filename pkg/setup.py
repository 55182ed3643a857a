"""Build hook for the optional compiled stepping kernel.

``pip install -e . --no-build-isolation`` compiles ``gridrover._speedups``
when Cython and a C compiler are available.  If either is missing, or the
compile fails, the install still completes and the package falls back to
the pure-Python kernel at import time.

Set GRIDROVER_PURE_PYTHON=1 to skip the extension build entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class _OptionalBuildExt(build_ext):
    """build_ext that degrades to a pure-Python install on compile failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing entirely
            print(f"warning: skipping compiled kernel ({exc}); "
                  "using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); "
                  "using pure-Python fallback")


ext_modules = []
cmdclass = {}

if os.environ.get("GRIDROVER_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        # -ffp-contract=off keeps the compiler from fusing a*b+c into FMA,
        # which would change results in the last bit relative to the
        # pure-Python kernel.  Both kernels must produce identical floats.
        ext_modules = cythonize(
            [
                Extension(
                    "gridrover._speedups",
                    ["src/gridrover/_speedups.pyx"],
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
        cmdclass["build_ext"] = _OptionalBuildExt
    except ImportError:
        pass

setup(ext_modules=ext_modules, cmdclass=cmdclass)
