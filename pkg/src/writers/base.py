from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any


class BaseWriter(ABC):
    @abstractmethod
    def write(self, row: dict[str, Any]) -> None:
        """Append one row to the output."""
        raise NotImplementedError

    def close(self) -> None:
        return None

    def __enter__(self) -> BaseWriter:
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()
