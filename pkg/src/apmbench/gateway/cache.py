"""Content-addressed on-disk cache: one JSON file per key, named ``<hex key>.json``."""
from __future__ import annotations

import json
import os
import tempfile
import threading
from pathlib import Path

from ..records import dumps


class DiskCache:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def _lock(self, key: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(key, threading.Lock())

    def path(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def get(self, key: str):
        try:
            with open(self.path(key), encoding="utf-8") as fh:
                return json.load(fh)["response"]
        except FileNotFoundError:
            return None

    def put(self, key: str, response, request=None) -> None:
        with self._lock(key):
            if self.path(key).exists():
                return
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".", suffix=".part")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(dumps({"key": key, "request": request, "response": response}))
            os.replace(tmp, self.path(key))

    def __contains__(self, key: str) -> bool:
        return self.path(key).exists()

    def keys(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))

    def __len__(self) -> int:
        return len(self.keys())

    def size_bytes(self) -> int:
        return sum(p.stat().st_size for p in self.root.glob("*.json"))

    def clear(self) -> int:
        n = 0
        for p in self.root.glob("*.json"):
            p.unlink()
            n += 1
        return n
