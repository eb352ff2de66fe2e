"""Coalescing-branching random walk laboratory."""
