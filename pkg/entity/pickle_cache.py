from __future__ import annotations
import logging
import os
import pickle
import threading
from pathlib import Path

from entity.config import Config


logger = logging.getLogger(__name__)


class PickleCache():
    """
    Named store of pickled results (oracle-labelled datasets) kept in
    `<cache_dir>/<name>.pkl`.

    Attributes:
        name (str): Cache name, also the file stem.
        entries (dict): Loaded entries keyed by argument hash.

    Methods:
        get_instance(name: str) -> PickleCache:
            Shared instance per name; loads the file on first use.

        has(key: str) -> bool / get(key: str) / set(key: str, value):
            Lookup and store. `set` rewrites the file.

        reset():
            Forgets every instance so the next lookup reloads from disk.
    """

    _instances: dict[str, PickleCache] = {}
    _lock = threading.Lock()

    def __init__(self, name: str):
        self.name = name
        self.entries = self._load()

    @property
    def path(self) -> Path:
        return Config.get_singleton().cache_dir / f"{self.name}.pkl"

    def __len__(self) -> int:
        return len(self.entries)

    def has(self, key: str) -> bool:
        return key in self.entries

    def get(self, key: str):
        return self.entries.get(key)

    def set(self, key: str, value):
        with PickleCache._lock:
            self.entries[key] = value
            self._dump()

    @staticmethod
    def get_instance(name: str) -> PickleCache:
        with PickleCache._lock:
            if name not in PickleCache._instances:
                PickleCache._instances[name] = PickleCache(name)
            return PickleCache._instances[name]

    @staticmethod
    def reset():
        with PickleCache._lock:
            PickleCache._instances = {}

    def _load(self) -> dict:
        if not self.path.exists():
            return {}
        with open(self.path, "rb") as f:
            entries = pickle.load(f)
        logger.debug(f"Loaded {len(entries)} '{self.name}' entries from {self.path}")
        return entries

    def _dump(self):
        os.makedirs(self.path.parent, exist_ok=True)
        partial = self.path.with_suffix(".pkl.part")
        with open(partial, "wb") as f:
            pickle.dump(self.entries, f, protocol=pickle.HIGHEST_PROTOCOL)
        os.replace(partial, self.path)
