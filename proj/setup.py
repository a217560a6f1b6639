import os
import shutil
import subprocess
import sys

import pybind11
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name, sourcedir=""):
        super().__init__(name, sources=[])
        self.sourcedir = os..path.abspath(sourcedir)


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        extdir = os.path.abspath(os.path.dirname(self.get_ext_fullpath(ext.name)))
        cfg = os.environ.get("CKN_BUILD_TYPE", "Release")
        cmake_args = [
            f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY={extdir}",
            f"-DCMAKE_BUILD_TYPE={cfg}",
            "-DCKN_PYTHON_ONLY=ON",
            f"-DPython_EXECUTABLE={sys.executable}",
            f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
        ]
        if shutil.which("ninja"):
            cmake_args.append("-GNinja")
        os.makedirs(self.build_temp, exist_ok=True)
        subprocess.run(
            ["cmake", ext.sourcedir, *cmake_args], cwd=self.build_temp, check=True
        )
        subprocess.run(
            ["cmake", "--build", ".", "--target", "_cknlab", "--parallel"],
            cwd=self.build_temp,
            check=True,
        )


setup(
    ext_modules=[CMakeExtension("cknlab._cknlab")],
    cmdclass={"build_ext": CMakeBuild},
    zip_safe=False,
)
