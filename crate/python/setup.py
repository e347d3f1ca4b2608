"""Builds the Rust extension module with cargo and installs it in place.

Use `pip install -e . --no-build-isolation` from this directory.
"""

import shutil
import subprocess
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CargoExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CargoBuildExt(build_ext):
    def build_extension(self, ext):
        workspace = Path(__file__).resolve().parent.parent
        subprocess.run(
            ["cargo", "build", "--release", "-p", "npext-py"],
            cwd=workspace,
            check=True,
        )
        built = workspace / "target" / "release" / "lib_npext.so"
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(built, dest)


setup(
    ext_modules=[CargoExtension("npext_py._npext")],
    cmdclass={"build_ext": CargoBuildExt},
    zip_safe=False,
)
