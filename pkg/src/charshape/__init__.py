"""charshape: shape a fictional character by talking to it."""

__version__ = "0.1.0"
