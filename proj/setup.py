import glob
import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

here = os.path.dirname(os.path.abspath(__file__))

eigen_candidates = ["/usr/include/eigen3", "/usr/local/include/eigen3"]
eigen = next((p for p in eigen_candidates if os.path.isdir(p)), eigen_candidates[0])

ext = Pybind11Extension(
    "psfkit._core",
    # service.cpp (HTTP server) stays CLI-only; the module does not bind it.
    sources=sorted(
        p for p in glob.glob(os.path.join("src", "*.cpp"))
        if not p.endswith("service.cpp")
    )
    + [os.path.join("python", "bindings.cpp")],
    include_dirs=["include", "vendor", eigen],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
