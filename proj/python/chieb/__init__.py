"""Empirical-Bayes effect-size estimation for chi-squared statistics."""

from chieb._core import *  # noqa: F401,F403
from chieb._core import __doc__ as _core_doc

__doc__ = _core_doc
__version__ = "0.1.0"
