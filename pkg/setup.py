"""Build the optional Cython kernels; fall back to a pure install on failure."""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Retry without OpenMP, then give up quietly: the package has a
    pure-Python fallback for every kernel."""

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            if "-fopenmp" in ext.extra_compile_args:
                ext.extra_compile_args = [a for a in ext.extra_compile_args if a != "-fopenmp"]
                ext.extra_link_args = [a for a in ext.extra_link_args if a != "-fopenmp"]
                try:
                    super().build_extension(ext)
                    return
                except Exception as exc2:  # noqa: BLE001
                    exc = exc2
            print(f"warning: compiled kernels not built ({exc}); using fallback", file=sys.stderr)


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "restart_grade._kernels",
        ["src/restart_grade/_kernels.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off", "-fopenmp"],
        extra_link_args=["-fopenmp"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"}, quiet=True)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
