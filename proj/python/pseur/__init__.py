"""Uniform-linear-array adaptive beamforming toolkit.

Thin wrapper over the compiled `_pseur` extension module. When the package
is installed (scikit-build-core places the extension inside the package)
the relative import works; during an in-tree CMake build the extension sits
on PYTHONPATH instead, so fall back to a top-level import.
"""

try:
    from ._pseur import *  # noqa: F401,F403
    from ._pseur import __version__  # noqa: F401
except ImportError:  # in-tree build: extension is on sys.path, not in-package
    from _pseur import *  # noqa: F401,F403
    from _pseur import __version__  # noqa: F401
