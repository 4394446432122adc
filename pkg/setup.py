from setuptools import Extension, setup
from Cython.Build import cythonize
import numpy as np

ext = Extension(
    "cellassoc._slotkernel",
    ["src/cellassoc/_slotkernel.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O3"],
)

setup(ext_modules=cythonize(ext, language_level=3))
