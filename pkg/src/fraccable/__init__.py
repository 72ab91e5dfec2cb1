"""Numerics for a stochastic time-space fractional cable equation driven by rough fractional noise."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("fraccable")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"
