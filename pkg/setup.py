"""Build hook for the optional compiled math kernels.

The extension is a performance twin of lockstep.detmath._reference and must
round identically at every intermediate, so the compile flags forbid FMA
contraction and any fast-math reassociation.  If Cython or a C compiler is
missing the build silently falls back to the pure-Python reference; nothing
in the package requires the extension.
"""

import os

from setuptools import setup
from setuptools.errors import CCompilerError, ExecError, PlatformError

ext_modules = []
if os.environ.get("LOCKSTEP_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "lockstep.detmath._kernels",
                    ["src/lockstep/detmath/_kernels.pyx"],
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []


class _BuildFailed(Exception):
    pass


def _run(ext):
    from setuptools.command.build_ext import build_ext

    class guarded_build_ext(build_ext):
        def run(self):
            try:
                build_ext.run(self)
            except (PlatformError, FileNotFoundError):
                raise _BuildFailed()

        def build_extension(self, e):
            try:
                build_ext.build_extension(self, e)
            except (CCompilerError, ExecError, ValueError):
                raise _BuildFailed()

    try:
        setup(ext_modules=ext, cmdclass={"build_ext": guarded_build_ext})
        return True
    except _BuildFailed:
        return False


if not ext_modules:
    setup()
elif not _run(ext_modules):
    print("compiled kernels unavailable, using the pure-Python reference")
    setup()
