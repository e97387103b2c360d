"""Build the optional Cython kernels.

Set BERNSTEIN_ORLICZ_PURE_PYTHON=1 to skip the extension; the package then
runs on its numpy fallback.
"""
import os

from setuptools import Extension, setup


def extensions():
    if os.environ.get("BERNSTEIN_ORLICZ_PURE_PYTHON"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "bernstein_orlicz._ckernels",
        ["src/bernstein_orlicz/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        # no -ffast-math: the RNG and reductions must stay bit-exact
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(ext_modules=extensions())
