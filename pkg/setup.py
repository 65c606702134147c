from setuptools import setup, Extension

import numpy as np

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "vpscape.kernels._ext",
                ["src/vpscape/kernels/_ext.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
else:
    # Pure-Python kernels are selected at import time when the extension
    # is unavailable, so a build without Cython still works.
    ext_modules = []

setup(ext_modules=ext_modules)
