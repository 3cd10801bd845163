from .base import run


__all__ = ["run"]
