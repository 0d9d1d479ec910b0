"""Walls, curtains, contact graphs and projection systems for short rank-one search."""

__version__ = "0.1.0"
