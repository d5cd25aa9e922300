from abc import ABC, abstractmethod


class Cachable(ABC):
    """
    Abstract base class for entities that can key a cache entry or be
    compared by content.

    Methods:
        get_hash(): Abstract method that should return a stable content hash.
    """

    @abstractmethod
    def get_hash(self) -> str:
        pass
