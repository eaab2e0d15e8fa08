import warnings

from setuptools import setup


def _extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ModuleNotFoundError:
        warnings.warn("cython/numpy unavailable; installing the pure-Python "
                      "kernels only")
        return []
    ext = Extension(
        "fransdcp._core",
        ["src/fransdcp/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
