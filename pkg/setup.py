"""Build the optional compiled KMC kernel.

The package works without it (pure-Python fallback); set
``ENTROPIC_NO_EXT=1`` to skip compilation.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("ENTROPIC_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "entropic.kmc._kmc_core",
                    ["src/entropic/kmc/_kmc_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # keep a*b+c unfused so results match the Python kernel bit for bit
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
