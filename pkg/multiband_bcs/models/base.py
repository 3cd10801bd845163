from __future__ import annotations

from typing_extensions import Self

from pydantic import BaseModel, ConfigDict


class BasePhysicalModel(BaseModel):
    """Base class for immutable physical entities"""

    model_config = ConfigDict(frozen=True)

    def __repr__(self):
        attrs = []
        for name in self.__class__.model_fields:
            attrs.append(f"{name}={getattr(self, name)}")
        return "{}({})".format(self.__class__.__name__, ', '.join(attrs))

    @classmethod
    def create(cls, **kwargs) -> Self:
        return cls.model_validate(kwargs)

    def update(self, **kwargs) -> Self:
        """Return a validated copy with new values from kwargs"""
        return self.__class__.model_validate(self.model_dump() | kwargs)
