import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("RISASK_PURE_PYTHON"):
    ext_modules = cythonize(
        [
            Extension(
                "risask._kernel",
                ["src/risask/_kernel.pyx"],
                extra_compile_args=["-O3", "-march=native", "-ffast-math", "-fopenmp"],
                extra_link_args=["-fopenmp", "-lmvec", "-lm"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
