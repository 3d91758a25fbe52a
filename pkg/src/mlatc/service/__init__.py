"""FastAPI layer exposing sessions, runs, sweeps, and analysis over HTTP."""

from .app import app, create_app

__all__ = ["app", "create_app"]
