"""Sparse FGMRES solves with baseline and trainable graph neural preconditioners."""

__version__ = "0.1.0"

try:
    from ._gnp import *  # noqa: F401,F403  (installed layout)
except ImportError:  # in-tree layout with the build directory on sys.path
    from _gnp import *  # noqa: F401,F403
