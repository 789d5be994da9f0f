"""Build script: compiles the optional CRP Gibbs extension when Cython is
available. The package works without it via the pure-numpy fallback."""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("swipeguard._crp", ["src/swipeguard/_crp.pyx"],
                   include_dirs=[numpy.get_include()])],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
