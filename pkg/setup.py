import os

from setuptools import Extension, setup


def extensions():
    """Build the compiled flight kernel unless disabled or impossible.

    The package works without it: seascan.kernel falls back to the pure-Python
    twin at import time.
    """
    if os.environ.get("SEASCAN_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "seascan.kernel._flight_cy",
        ["src/seascan/kernel/_flight_cy.pyx"],
        # -ffp-contract=off keeps the C math bit-identical with the pure
        # Python twin (no FMA contraction), which test_kernel.py asserts.
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
