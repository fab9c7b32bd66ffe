"""Harness steps; importing this package registers all of them."""

from . import audit, bist, describe, simulate, validate  # noqa: F401
