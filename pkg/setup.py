"""Builds the optional compiled kernels; the package works without them."""
import os
import platform

from setuptools import setup
from setuptools.command.build_ext import build_ext

ext_modules = []
if os.environ.get("PATCHCERT_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        if platform.system() == "Windows":
            compile_args = ["/O2"]
        else:
            compile_args = ["-O3"]
        ext_modules = cythonize(
            [
                Extension(
                    "patchcert._ckernels",
                    ["src/patchcert/_ckernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=compile_args
                    + ["-DNPY_NO_DEPRECATED_API=NPY_1_7_API_VERSION"],
                )
            ],
            language_level="3",
        )


class OptionalBuildExt(build_ext):
    """Fall back to the pure-Python kernels if compilation fails."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled kernels not built ({exc})")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc})")


setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
