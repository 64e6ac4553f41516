import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "coordperc._ckernels",
        ["src/coordperc/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,  # without a compiler the pure-Python kernels are used
    )
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
