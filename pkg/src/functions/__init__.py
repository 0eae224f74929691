"""Thin, user-facing function wrappers for common workflows.

Modules provide simple, composable APIs to solve, bound and tabulate
discrimination problems from notebooks or scripts without importing the
internal packages.
"""
