import numpy as np
from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "cosetsum._kernels",
                sources=["src/cosetsum/_kernels.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-python fallback kernels are used when the extension is absent.
    pass

setup(ext_modules=ext_modules)
