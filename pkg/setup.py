"""Build hook for the optional compiled kernels.

The package works without them; when Cython or a compiler is missing the
extension is skipped and ``qrlin.kernels`` falls back to numpy.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "qrlin._kernels",
                ["src/qrlin/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"qrlin: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
