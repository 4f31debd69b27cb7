"""Build script for the optional compiled solver kernels.

The package works without the extension (pure NumPy fallback); the
extension only accelerates the benchmark hot loops.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.path.exists("src/axgdkit/_kernels.pyx"):
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "axgdkit._kernels",
                    ["src/axgdkit/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    optional=True,
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
