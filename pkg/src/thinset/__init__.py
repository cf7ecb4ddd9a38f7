"""Numerical experiments on integral points of thin sets of type II."""

from thinset.errors import ThinsetError
from thinset.polyring import Polynomial, parse, to_text

__version__ = "0.1.0"

__all__ = ["Polynomial", "ThinsetError", "parse", "to_text", "__version__"]
