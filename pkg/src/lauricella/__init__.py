"""Twisted (co)homology toolkit for the Lauricella F_D system."""

__version__ = "0.1.0"
