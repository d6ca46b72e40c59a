"""Build glue for the optional compiled refinement kernel.

The package is fully functional without the extension; stoqsym.canon falls
back to the pure-Python kernel when the import of stoqsym._refine fails.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # source-only install
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [Extension("stoqsym._refine", ["src/stoqsym/_refine.pyx"])],
        language_level="3",
    )

setup(ext_modules=ext_modules)
