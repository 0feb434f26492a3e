"""Sandbox worker package: line-delimited stdio executor for
external-code heuristics."""

from .server import Worker, main

__version__ = "0.1.0"

__all__ = ["Worker", "main"]
