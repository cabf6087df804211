"""Embedding-vector library over training NLQs and DVQs with exact cosine top-K retrieval.

Vectors are unit-normalized when the library is built, so retrieval reduces to a
max-dot-product scan. Retrieval is an exact linear scan (no approximate index):
the training corpora involved are small and exactness keeps tests deterministic.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

import numpy as np

KIND_NLQ = "NLQ"
KIND_DVQ = "DVQ"
_KINDS = (KIND_NLQ, KIND_DVQ)

_NORM_TOL = 1e-9


class DimensionMismatch(ValueError):
    pass


class ZeroVector(ValueError):
    pass


class EmptyLibraryForKind(LookupError):
    pass


class EmbedderFailure(RuntimeError):
    pass


class EmptyText(ValueError):
    pass


class RemoteUnavailable(RuntimeError):
    pass


@dataclass(frozen=True)
class Embedding:
    model_id: str
    dim: int
    values: tuple[float, ...]

    def __post_init__(self):
        if self.dim <= 0 or len(self.values) != self.dim:
            raise DimensionMismatch(f"expected {self.dim} values, got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("embedding contains non-finite values")

    def norm(self) -> float:
        return float(np.linalg.norm(np.asarray(self.values)))

    def normalized(self) -> "Embedding":
        arr = np.asarray(self.values, dtype=np.float64)
        norm = float(np.linalg.norm(arr))
        if norm == 0.0:
            raise ZeroVector("cannot normalize a zero vector")
        return Embedding(self.model_id, self.dim, tuple((arr / norm).tolist()))


def cosine(u: Embedding, v: Embedding) -> float:
    """Cosine similarity dot(u,v)/(|u||v|), clamped to [-1, 1]."""
    if u.dim != v.dim:
        raise DimensionMismatch(f"dim {u.dim} vs {v.dim}")
    a = np.asarray(u.values, dtype=np.float64)
    b = np.asarray(v.values, dtype=np.float64)
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine is undefined for a zero vector")
    return float(np.clip(float(a @ b) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class LibraryEntry:
    entry_id: str
    kind: str
    embedding: Embedding
    example_id: str


class VectorLibrary:
    """Immutable store of unit-normalized entries for one embedding model."""

    def __init__(self, entries: Sequence[LibraryEntry], model_id: str):
        seen_ids = set()
        for entry in entries:
            if entry.kind not in _KINDS:
                raise ValueError(f"unknown entry kind {entry.kind!r}")
            if entry.embedding.model_id != model_id:
                raise ValueError(f"entry {entry.entry_id} uses model {entry.embedding.model_id!r}")
            if entry.entry_id in seen_ids:
                raise ValueError(f"duplicate entry_id {entry.entry_id!r}")
            seen_ids.add(entry.entry_id)
            if abs(entry.embedding.norm() - 1.0) > _NORM_TOL:
                raise ValueError(f"entry {entry.entry_id} is not unit-normalized")
        dims = {e.embedding.dim for e in entries}
        if len(dims) > 1:
            raise DimensionMismatch(f"mixed dimensions in library: {sorted(dims)}")
        self.entries: tuple[LibraryEntry, ...] = tuple(entries)
        self.model_id = model_id
        self.dim = dims.pop() if dims else 0
        self._by_kind: dict[str, list[tuple[LibraryEntry, np.ndarray, float]]] = {}
        for kind in _KINDS:
            members = []
            for entry in self.entries:
                if entry.kind == kind:
                    arr = np.asarray(entry.embedding.values, dtype=np.float64)
                    members.append((entry, arr, float(np.linalg.norm(arr))))
            self._by_kind[kind] = members

    def __len__(self) -> int:
        return len(self.entries)

    def entries_of(self, kind: str) -> list[LibraryEntry]:
        return [entry for entry, _, _ in self._by_kind[kind]]

    def top_k(self, query: Embedding, kind: str, k: int) -> list[tuple[LibraryEntry, float]]:
        """Entries of `kind` ranked by descending cosine score; ties break by ascending entry_id.

        Scores use the exact same arithmetic as :func:`cosine`, so the ranking is
        reproducible against a per-entry brute-force scan.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        members = self._by_kind[kind]
        if not members:
            raise EmptyLibraryForKind(f"library holds no {kind} entries")
        if query.dim != self.dim:
            raise DimensionMismatch(f"query dim {query.dim} vs library dim {self.dim}")
        q = np.asarray(query.values, dtype=np.float64)
        qnorm = float(np.linalg.norm(q))
        if qnorm == 0.0:
            raise ZeroVector("query is a zero vector")
        ranked = sorted(
            (
                (entry, float(np.clip(float(q @ arr) / (qnorm * norm), -1.0, 1.0)))
                for entry, arr, norm in members
            ),
            key=lambda pair: (-pair[1], pair[0].entry_id),
        )
        return ranked[:k]

    # ------------------------------------------------------------ persistence

    def save(self, path: str | os.PathLike) -> None:
        """Write the cache file: one JSON record per entry, in library order."""
        with open(path, "w", encoding="utf-8") as handle:
            for entry in self.entries:
                record = {
                    "example_id": entry.example_id,
                    "kind": entry.kind,
                    "model_id": entry.embedding.model_id,
                    "dim": entry.embedding.dim,
                    "values": list(entry.embedding.values),
                }
                handle.write(json.dumps(record) + "\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "VectorLibrary":
        entries = []
        model_id = None
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                record = json.loads(line)
                embedding = Embedding(record["model_id"], record["dim"], tuple(record["values"]))
                if abs(embedding.norm() - 1.0) > _NORM_TOL:
                    raise ValueError(f"{path}:{lineno}: vector is not unit-normalized")
                if model_id is None:
                    model_id = embedding.model_id
                entries.append(
                    LibraryEntry(_entry_id(lineno - 1), record["kind"], embedding, record["example_id"])
                )
        if model_id is None:
            raise ValueError(f"{path}: empty embedding cache")
        return cls(entries, model_id)


def _entry_id(index: int) -> str:
    return f"{index:06d}"


class Embedder(Protocol):
    model_id: str

    def embed(self, text: str) -> Embedding: ...


def build_library(examples: Iterable, embedder: Embedder, workers: int = 1) -> VectorLibrary:
    """Embed each training example's NLQ and DVQ; two entries per example, in example order."""
    examples = list(examples)
    if not examples:
        raise ValueError("cannot build a library from zero examples")

    def embed_pair(example):
        try:
            return (
                embedder.embed(example.nlq).normalized(),
                embedder.embed(example.dvq).normalized(),
            )
        except Exception as exc:
            raise EmbedderFailure(f"example {example.example_id}: {exc}") from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(embed_pair, examples))
    else:
        pairs = [embed_pair(example) for example in examples]

    entries = []
    for example, (nlq_vec, dvq_vec) in zip(examples, pairs):
        entries.append(LibraryEntry(_entry_id(len(entries)), KIND_NLQ, nlq_vec, example.example_id))
        entries.append(LibraryEntry(_entry_id(len(entries)), KIND_DVQ, dvq_vec, example.example_id))
    return VectorLibrary(entries, embedder.model_id)


class LocalEmbedder:
    """Deterministic offline embedder: hashed character trigrams in a fixed-dim vector.

    Exists so the whole pipeline runs without network access; not a semantic
    model, but stable across runs and platforms, which is what tests need.
    """

    def __init__(self, dim: int = 256):
        if dim < 8:
            raise ValueError("dim must be >= 8")
        self.dim = dim
        self.model_id = f"local-ngram-{dim}"

    def embed(self, text: str) -> Embedding:
        if not text:
            raise EmptyText("cannot embed empty text")
        padded = f" {text} "
        grams = Counter(padded[i : i + 3] for i in range(len(padded) - 2))
        vec = np.zeros(self.dim, dtype=np.float64)
        for gram, count in grams.items():
            digest = hashlib.sha256(gram.encode("utf-8")).digest()
            index = int.from_bytes(digest[:4], "big") % self.dim
            sign = 1.0 if digest[4] & 1 else -1.0
            vec[index] += sign * count
        if not vec.any():
            # signs cancelled; fall back to a single stable component
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            vec[int.from_bytes(digest[:4], "big") % self.dim] = 1.0
        vec /= np.linalg.norm(vec)
        return Embedding(self.model_id, self.dim, tuple(vec.tolist()))


class RemoteEmbedder:
    """Embedding client for an OpenAI-style ``/embeddings`` endpoint.

    The returned dimension is whatever the backend reports; it is never assumed.
    """

    def __init__(
        self,
        base_url: str,
        model_id: str = "text-embedding-3-large",
        api_key_env: str = "GRED_API_KEY",
        timeout: float = 60.0,
        transport=None,
    ):
        import httpx

        self.model_id = model_id
        self.api_key_env = api_key_env
        self._client = httpx.Client(base_url=base_url, timeout=timeout, transport=transport)

    def embed(self, text: str) -> Embedding:
        import httpx

        if not text:
            raise EmptyText("cannot embed empty text")
        api_key = os.environ.get(self.api_key_env)
        if not api_key:
            raise RemoteUnavailable(f"credential env var {self.api_key_env} is not set")
        try:
            response = self._client.post(
                "/embeddings",
                json={"model": self.model_id, "input": text},
                headers={"Authorization": f"Bearer {api_key}"},
            )
        except httpx.HTTPError as exc:
            raise RemoteUnavailable(f"embedding request failed: {exc}") from exc
        if response.status_code != 200:
            raise RemoteUnavailable(f"embedding endpoint returned HTTP {response.status_code}")
        values = response.json()["data"][0]["embedding"]
        return Embedding(self.model_id, len(values), tuple(float(v) for v in values))
