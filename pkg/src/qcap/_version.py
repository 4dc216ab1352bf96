"""Version definition for qcap."""

__version__ = "0.3.0"
