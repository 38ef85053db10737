"""Build script: compiles the matcher kernel extension when Cython is available.

The package is fully functional without the extension; the matcher falls back
to a pure-Python kernel at import time. Set PLSUM_NO_EXT=1 to skip the build.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PLSUM_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "plsum.matcher._ckernel",
                    ["src/plsum/matcher/_ckernel.pyx"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
