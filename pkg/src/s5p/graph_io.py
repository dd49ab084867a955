"""Edge-list ingestion: replayable streams, global degrees, head/tail classification.

The stream is backed by a compacted binary cache on disk so that every pass
reads fixed-size blocks instead of materializing the edge list in memory.
Vertex ids are remapped to a dense 0..|V|-1 range when the stream is opened;
the original->compact map is persisted next to the input as "<input>.idmap".
"""

from __future__ import annotations

import enum
import os
import struct
from dataclasses import dataclass
from typing import Iterator

import numpy as np

BINARY_MAGIC = b"S5PE"
BINARY_VERSION = 1
_HEADER = struct.Struct("<4sIQ")

# Edges per block when replaying a pass. Fixed so that per-pass buffer
# memory does not scale with |E|.
BLOCK_EDGES = 1 << 16


class FormatError(ValueError):
    """Raised for unreadable or malformed edge-list input."""


class EdgeKind(enum.Enum):
    HEAD = "head"
    TAIL = "tail"


@dataclass
class DegreeTable:
    """Global degree of every compacted vertex (self-loops count twice)."""

    degree: np.ndarray
    d_min: int
    d_max: int

    def __len__(self) -> int:
        return len(self.degree)


class EdgeStream:
    """Replayable sequence of edges over an on-disk compacted edge list.

    Every pass yields the same edges in the same order. Blocks are numpy
    arrays of shape (n, 2) with dtype uint64.
    """

    def __init__(self, source: str, cache_path: str, edge_count: int, vertex_count: int):
        self.source = source
        self.cache_path = cache_path
        self.edge_count = edge_count
        self.vertex_count = vertex_count

    def blocks(self, block_edges: int = BLOCK_EDGES) -> Iterator[np.ndarray]:
        """One sequential pass over all edges, in fixed-size blocks."""
        pair = np.dtype("<u8")
        with open(self.cache_path, "rb") as f:
            f.seek(_HEADER.size)
            remaining = self.edge_count
            while remaining > 0:
                n = min(block_edges, remaining)
                block = np.fromfile(f, dtype=pair, count=2 * n)
                if block.size != 2 * n:
                    raise FormatError(f"stream cache truncated: {self.cache_path}")
                yield block.reshape(-1, 2)
                remaining -= n

    def edges(self) -> Iterator[tuple[int, int]]:
        """Per-edge iteration; convenient for small graphs and tests."""
        for block in self.blocks():
            for u, v in block.tolist():
                yield u, v

    def checksum(self) -> int:
        """Order-sensitive checksum of the full edge sequence."""
        import zlib

        crc = 0
        for block in self.blocks():
            crc = zlib.crc32(np.ascontiguousarray(block).tobytes(), crc)
        return crc


def _parse_text_chunks(path: str, chunk_edges: int = BLOCK_EDGES):
    """Yield (us, vs) uint64 array chunks; memory stays O(chunk)."""
    us: list[int] = []
    vs: list[int] = []
    with open(path, "rt", encoding="ascii", errors="strict") as f:
        for lineno, line in enumerate(f, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected 'u v', got {stripped!r}")
            try:
                u = int(parts[0])
                v = int(parts[1])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-integer vertex id in {stripped!r}") from None
            if u < 0 or v < 0:
                raise FormatError(f"{path}:{lineno}: negative vertex id in {stripped!r}")
            us.append(u)
            vs.append(v)
            if len(us) >= chunk_edges:
                yield np.asarray(us, dtype=np.uint64), np.asarray(vs, dtype=np.uint64)
                us.clear()
                vs.clear()
    if us:
        yield np.asarray(us, dtype=np.uint64), np.asarray(vs, dtype=np.uint64)


def _parse_binary_chunks(path: str, chunk_edges: int = BLOCK_EDGES):
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise FormatError(f"{path}: truncated or missing binary header")
        magic, version, count = _HEADER.unpack(header)
        if magic != BINARY_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {BINARY_MAGIC!r}")
        if version != BINARY_VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        remaining = count
        while remaining > 0:
            n = min(chunk_edges, remaining)
            flat = np.fromfile(f, dtype="<u8", count=2 * n)
            if flat.size != 2 * n:
                raise FormatError(f"{path}: header claims {count} edges, file is shorter")
            yield flat[0::2], flat[1::2]
            remaining -= n


def write_binary_edges(path: str, us: np.ndarray, vs: np.ndarray) -> None:
    """Write a binary edge list (magic, version, count, u64 LE pairs)."""
    n = len(us)
    with open(path, "wb") as f:
        f.write(_HEADER.pack(BINARY_MAGIC, BINARY_VERSION, n))
        pairs = np.empty((n, 2), dtype="<u8")
        pairs[:, 0] = us
        pairs[:, 1] = vs
        pairs.tofile(f)


def _compact_chunk(us: np.ndarray, vs: np.ndarray, remap: dict):
    """Remap one chunk against the running first-seen id map."""
    cu = np.empty(len(us), dtype=np.uint64)
    cv = np.empty(len(vs), dtype=np.uint64)
    i = 0
    for u, v in zip(us.tolist(), vs.tolist()):
        cid = remap.get(u)
        if cid is None:
            cid = len(remap)
            remap[u] = cid
        cu[i] = cid
        cid = remap.get(v)
        if cid is None:
            cid = len(remap)
            remap[v] = cid
        cv[i] = cid
        i += 1
    return cu, cv


def _write_compacted(chunks, cache_path: str):
    """Compact chunks onto disk; returns (edge_count, id map)."""
    remap: dict[int, int] = {}
    count = 0
    with open(cache_path, "wb") as out:
        out.write(_HEADER.pack(BINARY_MAGIC, BINARY_VERSION, 0))
        pairs = None
        for us, vs in chunks:
            cu, cv = _compact_chunk(us, vs, remap)
            if pairs is None or len(pairs) != len(cu):
                pairs = np.empty((len(cu), 2), dtype="<u8")
            pairs[:, 0] = cu
            pairs[:, 1] = cv
            pairs.tofile(out)
            count += len(cu)
        out.seek(0)
        out.write(_HEADER.pack(BINARY_MAGIC, BINARY_VERSION, count))
    return count, remap


def open_edge_stream(path: str, format: str = "auto") -> EdgeStream:
    """Open an edge list, compact its vertex ids and return a replayable stream.

    format is one of "text", "binary" or "auto" (sniff the binary magic).
    The input is converted chunk by chunk, so peak memory stays
    O(|V| + chunk) regardless of |E|. The compacted edges are cached next
    to the input so later passes are plain sequential reads; the id map is
    written to "<path>.idmap".
    """
    if not os.path.exists(path):
        raise FormatError(f"{path}: no such file")
    if os.path.getsize(path) == 0:
        raise FormatError(f"{path}: empty input")
    if format == "auto":
        with open(path, "rb") as f:
            format = "binary" if f.read(4) == BINARY_MAGIC else "text"
    if format == "text":
        chunks = _parse_text_chunks(path)
    elif format == "binary":
        chunks = _parse_binary_chunks(path)
    else:
        raise FormatError(f"unknown edge list format {format!r}")

    cache_path = path + ".s5pe"
    try:
        count, remap = _write_compacted(chunks, cache_path)
    except FormatError:
        if os.path.exists(cache_path):
            os.unlink(cache_path)
        raise
    if count == 0:
        os.unlink(cache_path)
        raise FormatError(f"{path}: no edges found")

    with open(path + ".idmap", "wt", encoding="ascii") as f:
        for orig, compact in remap.items():
            f.write(f"{orig} {compact}\n")
    return EdgeStream(path, cache_path, edge_count=count, vertex_count=len(remap))


def from_arrays(us, vs, cache_path: str) -> EdgeStream:
    """Build a stream from in-memory endpoint arrays (testing and synthesis)."""
    us = np.asarray(us, dtype=np.uint64)
    vs = np.asarray(vs, dtype=np.uint64)
    count, remap = _write_compacted([(us, vs)], cache_path)
    return EdgeStream(cache_path, cache_path, edge_count=count, vertex_count=len(remap))


def compute_degrees(stream: EdgeStream) -> DegreeTable:
    """Count endpoint occurrences per vertex in one dedicated pass.

    A self-loop contributes 2 to its vertex, so sum(degree) == 2|E| always.
    """
    deg = np.zeros(stream.vertex_count, dtype=np.int64)
    n = stream.vertex_count
    for block in stream.blocks():
        deg += np.bincount(block[:, 0].astype(np.int64), minlength=n)
        deg += np.bincount(block[:, 1].astype(np.int64), minlength=n)
    return DegreeTable(degree=deg, d_min=int(deg.min()), d_max=int(deg.max()))


def degree_threshold(edge_count: int, vertex_count: int, beta: float = 1.0) -> float:
    """Head/tail degree threshold: beta times the average degree 2|E|/|V|."""
    return beta * 2.0 * edge_count / vertex_count


def classify_edge(u: int, v: int, degrees: DegreeTable, xi: float) -> EdgeKind:
    """Head edge iff both endpoints have degree strictly above xi."""
    deg = degrees.degree
    if deg[u] > xi and deg[v] > xi:
        return EdgeKind.HEAD
    return EdgeKind.TAIL


def head_mask(block: np.ndarray, degrees: np.ndarray, xi: float) -> np.ndarray:
    """Vectorized classify: True where both endpoints exceed xi."""
    du = degrees[block[:, 0]]
    dv = degrees[block[:, 1]]
    return (du > xi) & (dv > xi)
