"""Build script for the optional compiled Monte Carlo kernel.

The package works without the extension (a batched-numpy fallback is
selected at import time), so a failed compilation is downgraded to a
warning rather than aborting the install.
"""

import warnings

from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "snmbounds._accel._poly_kernel",
                ["src/snmbounds/_accel/_poly_kernel.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    warnings.warn(f"compiled kernel disabled: {exc}")
    ext_modules = []

setup(ext_modules=ext_modules)
