"""Optional compiled build of the hot modules.

``finger_tree`` and ``adaptive_sort`` are plain Python; when Cython and a C
compiler are available they are also compiled from the same sources, which
roughly halves sort times. Any failure leaves the pure-Python package intact.
A stamp with the source hashes lets :mod:`arborsort._native` skip binaries
that no longer match their source.
"""

import hashlib
import json
import os

from setuptools import setup
from setuptools.command.build_ext import build_ext

ACCELERATED = ("finger_tree", "adaptive_sort")
SRC = os.path.join("src", "arborsort")


def _extensions():
    if os.environ.get("ARBORSORT_NO_COMPILE"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [os.path.join(SRC, f"{name}.py") for name in ACCELERATED],
        compiler_directives={"language_level": "3"},
        build_dir=os.path.join("build", "cython"),
        quiet=True,
    )


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # no compiler, bad toolchain, ...
            print(f"warning: compiled modules skipped ({exc}); using pure Python")
            return
        if not self.extensions:
            return
        stamp = {}
        for name in ACCELERATED:
            with open(os.path.join(SRC, f"{name}.py"), "rb") as fh:
                stamp[name] = hashlib.sha256(fh.read()).hexdigest()
        target = os.path.dirname(self.get_ext_fullpath(f"arborsort.{ACCELERATED[0]}"))
        with open(os.path.join(target, "_build_stamp.json"), "w") as fh:
            json.dump(stamp, fh, indent=1, sort_keys=True)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            raise RuntimeError(f"{ext.name}: {exc}") from exc


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
