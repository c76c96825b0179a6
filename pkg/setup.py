"""Build the optional compiled GF(2) elimination core.

The package is fully functional without it: khbn.ringalg falls back to the
pure-Python kernel when the extension is absent.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "khbn._f2core",
                ["src/khbn/_f2core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
