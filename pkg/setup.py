import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext = Extension(
    "driftnet.sde._kernel",
    ["src/driftnet/sde/_kernel.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    # -ffp-contract=off keeps the compiled kernel bit-identical to the
    # pure-Python fallback (no fused multiply-adds).
    extra_compile_args=["-O2", "-ffp-contract=off"],
)

setup(
    ext_modules=cythonize([ext], language_level=3) if cythonize else [],
)
