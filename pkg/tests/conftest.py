"""
Pytest configuration for critlab tests.

Experiments in the test suite run inline and charts render off-screen.
"""

import os


def pytest_configure(config):
    os.environ.setdefault("CRITLAB_WORKERS", "1")
    os.environ.setdefault("MPLBACKEND", "Agg")
