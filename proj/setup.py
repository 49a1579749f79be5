# SPDX-License-Identifier: Apache-2.0
#
# Builds the pybind11 extension through the project's CMake configuration so
# `pip install` and a plain CMake build produce the same module.

import shutil
import subprocess
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DCOHLAB_BUILD_TESTS=OFF",
                "-DCOHLAB_BUILD_CLI=OFF",
                "-DCOHLAB_BUILD_PYTHON=ON",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_core"],
            check=True,
        )

        built = sorted(build_dir.glob("python/cohlab/_core*.so"))
        if not built:
            raise RuntimeError("cmake did not produce the _core extension module")
        target = Path(self.get_ext_fullpath(ext.name)).resolve()
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built[-1], target)


setup(
    ext_modules=[CMakeExtension("cohlab._core")],
    cmdclass={"build_ext": CMakeBuild},
)
