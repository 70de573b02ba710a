import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("FHNBURST_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("fhnburst._speedup", ["src/fhnburst/_speedup.pyx"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # No Cython: the package falls back to the pure-Python kernel.
        ext_modules = []

setup(ext_modules=ext_modules)
