"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure-Python mirror of the kernels
is selected at import time), so any failure to cythonize or compile is
non-fatal: we fall back to a pure-python install rather than aborting.

FP contraction is disabled so the compiled kernels round exactly like the
pure-Python ones (an FMA would change low bits and break the bit-identity
guarantee between backends).
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext = Extension(
        "fpss._kernels._core",
        sources=["src/fpss/_kernels/_core.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    ext_modules = cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"fpss: skipping compiled kernels ({exc!r}); pure-python fallback will be used")

setup(ext_modules=ext_modules)
