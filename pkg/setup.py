from setuptools import Extension, setup
from Cython.Build import cythonize

# The compiled path-stepping core is an optional accelerator: if the build
# fails (no C compiler), the package falls back to the numpy mirror at import.
extensions = [
    Extension(
        "memfolio._pathcore",
        ["src/memfolio/_pathcore.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
