"""Cosine top-k over training-user embeddings."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatchError, EmptyInputError


@dataclass
class Neighbor:
    user_id: str
    similarity: float
    payload: object


@dataclass
class RetrievalIndex:
    user_ids: list
    vectors: np.ndarray  # (n, d), rows unit-normalised on construction
    payloads: list = field(default_factory=list)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != len(self.user_ids):
            raise DimensionMismatchError("one embedding row per indexed user")
        if self.payloads and len(self.payloads) != len(self.user_ids):
            raise DimensionMismatchError("one payload per indexed user")
        norms = np.linalg.norm(v, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise DimensionMismatchError("zero-norm embedding in index")
        self.vectors = v / norms
        if not self.payloads:
            self.payloads = [None] * len(self.user_ids)

    def __len__(self):
        return len(self.user_ids)

    def search(self, query, k: int = 3) -> tuple[list[Neighbor], bool]:
        """Top-``k`` by cosine similarity, ties broken by user id. Second value flags ``k > len(index)``."""
        if len(self) == 0:
            raise EmptyInputError("retrieval index is empty")
        q = np.asarray(query, dtype=np.float64)
        if q.shape != (self.vectors.shape[1],):
            raise DimensionMismatchError("query dimension differs from index")
        nq = np.linalg.norm(q)
        if nq == 0:
            raise DimensionMismatchError("zero-norm query")
        sims = self.vectors @ (q / nq)
        order = sorted(range(len(self)), key=lambda i: (-sims[i], self.user_ids[i]))
        truncated = k > len(self)
        return [Neighbor(self.user_ids[i], float(sims[i]), self.payloads[i]) for i in order[:k]], truncated
