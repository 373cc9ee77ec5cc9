import os

from setuptools import setup

ext_modules = []
if not os.environ.get("DENSECODE_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            ["src/densecode/_kernels.pyx"],
            compiler_directives={"language_level": "3"},
        )
        for ext in ext_modules:
            ext.include_dirs.append(numpy.get_include())
            ext.extra_compile_args.append("-O3")

setup(ext_modules=ext_modules)
