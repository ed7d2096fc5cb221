"""Oblivious communication games as tests of preparation contextuality."""

__version__ = "0.1.0"

from . import bellmap, bounds, cglmp, expdata, games, lp, optimizer, qmath  # noqa: F401
