"""Cluster-level summary of the clustered graph.

One extra pass over the edges records, for every pair of distinct clusters,
how many edges connect them. The counts go either into a count-min sketch
(fixed rows x width memory, one-sided overestimates) or into an exact map
for tests and tiny graphs. Adjacent-cluster sets are kept exactly either
way; inter-cluster counts are only ever queried for adjacent pairs.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import struct
from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusterState
from .graph_io import DegreeTable, EdgeStream

_MERSENNE_P = (1 << 61) - 1
_PAIR = struct.Struct("<QQ")


class InternalConsistencyError(RuntimeError):
    """An edge endpoint misses its required cluster entry."""


@dataclass
class SketchConfig:
    epsilon: float = 0.1
    nu: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not 0 < self.nu < 1:
            raise ValueError(f"nu must be in (0, 1), got {self.nu}")

    @property
    def width(self) -> int:
        return math.ceil(math.e / self.epsilon)

    @property
    def rows(self) -> int:
        return math.ceil(math.log(1.0 / self.nu))


class CountMinSketch:
    """rows x width counter grid with per-row 2-universal hashing.

    Point queries never undercount; with width ceil(e/eps) and rows
    ceil(ln(1/nu)) the overcount stays within eps * total insertions with
    probability at least 1 - nu.
    """

    def __init__(self, cfg: SketchConfig):
        self.cfg = cfg
        self.width = cfg.width
        self.rows = cfg.rows
        self.counters = [[0] * self.width for _ in range(self.rows)]
        rng = random.Random(cfg.seed)
        # Row hash over the 128-bit key digest: ((a1*x1 + a2*x2 + b) mod p) mod w
        self._coeffs = [
            (rng.randrange(1, _MERSENNE_P), rng.randrange(1, _MERSENNE_P),
             rng.randrange(0, _MERSENNE_P))
            for _ in range(self.rows)
        ]
        self.total = 0

    @staticmethod
    def _digest(key: bytes):
        d = hashlib.blake2b(key, digest_size=16).digest()
        return int.from_bytes(d[:8], "little"), int.from_bytes(d[8:], "little")

    def _positions(self, key: bytes):
        x1, x2 = self._digest(key)
        w = self.width
        return [((a1 * x1 + a2 * x2 + b) % _MERSENNE_P) % w for a1, a2, b in self._coeffs]

    def insert(self, key: bytes, count: int = 1) -> None:
        for row, pos in enumerate(self._positions(key)):
            self.counters[row][pos] += count
        self.total += count

    def query(self, key: bytes) -> int:
        return min(self.counters[row][pos] for row, pos in enumerate(self._positions(key)))


def cms_insert(sketch: CountMinSketch, key: bytes, count: int = 1) -> CountMinSketch:
    sketch.insert(key, count)
    return sketch


def cms_query(sketch: CountMinSketch, key: bytes) -> int:
    return sketch.query(key)


def pair_key(a: int, b: int) -> bytes:
    """Canonical byte key for a cluster pair: (min, max) as LE u64 pairs."""
    if a > b:
        a, b = b, a
    return _PAIR.pack(a, b)


@dataclass
class ClusterGraph:
    """Per-cluster sizes, kinds, neighbor sets and inter-cluster edge counts."""

    size: np.ndarray
    kind: np.ndarray
    neighbors: list
    theta_rows: list
    pairs_a: np.ndarray
    pairs_b: np.ndarray
    pairs_theta: np.ndarray
    mode: str
    sketch: CountMinSketch | None = None
    exact: dict | None = field(default=None, repr=False)

    @property
    def n_clusters(self) -> int:
        return len(self.size)

    @property
    def total_size(self) -> int:
        return int(self.size.sum())

    def f_total(self) -> np.ndarray:
        """Per-cluster sum of inter-cluster counts over all its neighbors."""
        return np.array([row.sum() for row in self.theta_rows], dtype=np.float64)

    def theta(self, a: int, b: int) -> int:
        """Estimated (sketch) or exact number of edges between two clusters."""
        if a == b:
            return 0
        if self.mode == "exact":
            if a > b:
                a, b = b, a
            return self.exact.get((a, b), 0)
        return self.sketch.query(pair_key(a, b))

    def head_ids(self) -> np.ndarray:
        return np.flatnonzero(self.kind == 0)

    def tail_ids(self) -> np.ndarray:
        return np.flatnonzero(self.kind == 1)

    def dump_json(self, path: str, max_clusters: int = 10_000) -> None:
        if self.n_clusters > max_clusters:
            raise ValueError(f"refusing debug dump for {self.n_clusters} clusters")
        payload = {
            "size": self.size.tolist(),
            "kind": ["head" if k == 0 else "tail" for k in self.kind.tolist()],
            "neighbors": {str(c): self.neighbors[c].tolist() for c in range(self.n_clusters)},
            "theta": {str(c): self.theta_rows[c].tolist() for c in range(self.n_clusters)},
        }
        with open(path, "wt", encoding="ascii") as f:
            json.dump(payload, f)

    @classmethod
    def _finalize(cls, sizes, kinds, adjacency, mode, sketch, exact):
        n = len(sizes)
        neighbors = []
        theta_rows = []
        if mode == "exact":
            def lookup(a, b):
                return exact.get((a, b), 0)
        else:
            def lookup(a, b):
                return sketch.query(_PAIR.pack(a, b))
        pa, pb, pt = [], [], []
        for c in range(n):
            ns = sorted(adjacency.get(c, ()))
            row = np.array([lookup(min(c, m), max(c, m)) for m in ns], dtype=np.float64)
            neighbors.append(np.array(ns, dtype=np.int64))
            theta_rows.append(row)
            for m, t in zip(ns, row.tolist()):
                if c < m:
                    pa.append(c)
                    pb.append(m)
                    pt.append(t)
        return cls(
            size=np.asarray(sizes, dtype=np.int64),
            kind=np.asarray(kinds, dtype=np.int64),
            neighbors=neighbors,
            theta_rows=theta_rows,
            pairs_a=np.asarray(pa, dtype=np.int64),
            pairs_b=np.asarray(pb, dtype=np.int64),
            pairs_theta=np.asarray(pt, dtype=np.float64),
            mode=mode,
            sketch=sketch,
            exact=exact,
        )

    @classmethod
    def from_pair_counts(cls, sizes, kinds, pair_counts: dict, mode: str = "exact",
                         sketch_cfg: SketchConfig | None = None) -> "ClusterGraph":
        """Direct construction from known inter-cluster counts (tests, oracles)."""
        adjacency: dict[int, set] = {}
        exact: dict | None = None
        sketch = None
        if mode == "exact":
            exact = {}
        else:
            sketch = CountMinSketch(sketch_cfg or SketchConfig())
        for (a, b), count in pair_counts.items():
            if a == b or count <= 0:
                continue
            a, b = (a, b) if a < b else (b, a)
            adjacency.setdefault(a, set()).add(b)
            adjacency.setdefault(b, set()).add(a)
            if mode == "exact":
                exact[(a, b)] = exact.get((a, b), 0) + count
            else:
                sketch.insert(_PAIR.pack(a, b), count)
        return cls._finalize(sizes, kinds, adjacency, mode, sketch, exact)


def resolve_clusters(block: np.ndarray, degrees: np.ndarray, xi: float,
                     v2c_h: np.ndarray, v2c_t: np.ndarray):
    """Resolve both endpoints of a block of edges to their clusters.

    A vertex is represented by its head cluster when it is a head vertex
    (degree above xi), otherwise by its tail cluster. Head vertices that
    never appeared in a head edge fall back to their tail cluster. This
    vertex-kind rule makes a mixed head/tail edge couple a head cluster to
    a tail cluster, which is what lets follower (tail) clusters chase the
    leaders they attach to.
    """
    us = block[:, 0].astype(np.int64)
    vs = block[:, 1].astype(np.int64)

    def side(ws):
        h = v2c_h[ws]
        t = v2c_t[ws]
        return np.where((degrees[ws] > xi) & (h >= 0), h, t)

    return us, vs, side(us), side(vs)


def build_cluster_graph(stream: EdgeStream, state: ClusterState, degrees: DegreeTable,
                        cfg: SketchConfig | None = None, exact: bool = False) -> ClusterGraph:
    """Summarize the clustered graph in one pass over the edge stream.

    Every edge is resolved to its endpoint clusters per the vertex-kind
    rule above; distinct-cluster pairs feed the neighbor sets and the
    count structure.
    """
    cfg = cfg or SketchConfig()
    v2c_h, v2c_t, vol, kind = state.as_arrays()
    deg = degrees.degree
    xi = state.xi
    n = max(state.n_clusters, 1)
    sketch = None
    exact_map: dict | None = None
    if exact:
        exact_map = {}
    else:
        sketch = CountMinSketch(cfg)
    adjacency: dict[int, set] = {}

    for block in stream.blocks():
        us, vs, cu, cv = resolve_clusters(block, deg, xi, v2c_h, v2c_t)
        missing = (cu < 0) | (cv < 0)
        if missing.any():
            bad = int(np.flatnonzero(missing)[0])
            raise InternalConsistencyError(
                f"edge ({int(us[bad])}, {int(vs[bad])}) has no cluster entry")
        cross = cu != cv
        if not cross.any():
            continue
        a = np.minimum(cu[cross], cv[cross])
        b = np.maximum(cu[cross], cv[cross])
        uniq, counts = np.unique(a * np.int64(n) + b, return_counts=True)
        ua = (uniq // n).tolist()
        ub = (uniq % n).tolist()
        for pa, pb, cnt in zip(ua, ub, counts.tolist()):
            adjacency.setdefault(pa, set()).add(pb)
            adjacency.setdefault(pb, set()).add(pa)
            if exact:
                exact_map[(pa, pb)] = exact_map.get((pa, pb), 0) + cnt
            else:
                sketch.insert(_PAIR.pack(pa, pb), cnt)

    return ClusterGraph._finalize(vol, kind, adjacency,
                                  "exact" if exact else "sketch", sketch, exact_map)
