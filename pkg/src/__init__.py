"""Root package for udisc: optimal unambiguous discrimination of mixed states."""

__all__ = []
