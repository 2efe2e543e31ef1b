import os

from setuptools import setup

ext_modules = []
if os.environ.get("CODEGRAPHS_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(["src/codegraphs/_kernels.pyx"], quiet=True)

setup(ext_modules=ext_modules)
