from __future__ import annotations

import logging

import pytest


@pytest.fixture(autouse=True)
def _reset_logging():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_udisc_handler", False):
            root.removeHandler(handler)
            handler.close()
