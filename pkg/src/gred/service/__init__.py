"""HTTP service layer: FastAPI app plus its pydantic models."""

from .app import create_app

__all__ = ["create_app"]
