"""Hybrid micro-ring resonator modelling and photon-statistics toolkit."""

__version__ = "0.1.0"

from ._kernels import BACKEND  # noqa: E402

__all__ = ["BACKEND", "__version__"]
