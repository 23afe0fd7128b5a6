"""Adaptive BST mergesorts, interleave bounds and arborally satisfied point sets."""

from ._native import select_builds

__version__ = "0.1.0"

#: which accelerated modules run compiled, e.g. ``{"finger_tree": True, ...}``
COMPILED = select_builds()
