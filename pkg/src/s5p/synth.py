"""R-MAT synthetic graph generator with controllable degree skewness.

Each edge is drawn by `scale` recursive quadrant choices with probabilities
(a, b, c, d); quadrant a in the top-left corner, so increasing a pushes mass
toward low vertex ids and fattens the degree head. Output is the text
edge-list format understood by graph_io.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_CHUNK = 1 << 16


@dataclass
class RmatConfig:
    scale: int
    edge_count: int
    a: float = 0.57
    b: float = 0.19
    c: float = 0.19
    d: float = 0.05
    seed: int = 0
    simple: bool = False

    def __post_init__(self):
        total = self.a + self.b + self.c + self.d
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"quadrant probabilities sum to {total}, expected 1")
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError("quadrant probabilities must be non-negative")
        if not 1 <= self.scale <= 30:
            raise ValueError(f"scale {self.scale} out of range [1, 30]")
        if self.edge_count < 1:
            raise ValueError("edge_count must be positive")


@dataclass
class GenSummary:
    vertex_count: int
    edge_count: int
    seed: int
    out_path: str


def _rmat_chunk(cfg: RmatConfig, chunk_index: int, n: int):
    """Deterministically generate one chunk of n edges."""
    seq = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(chunk_index,))
    rng = np.random.default_rng(seq)
    t_ab = cfg.a + cfg.b
    t_abc = t_ab + cfg.c
    u = np.zeros(n, dtype=np.uint64)
    v = np.zeros(n, dtype=np.uint64)
    for _ in range(cfg.scale):
        r = rng.random(n)
        quad = (r >= cfg.a).astype(np.uint64) + (r >= t_ab) + (r >= t_abc)
        u = (u << np.uint64(1)) | (quad >> np.uint64(1))
        v = (v << np.uint64(1)) | (quad & np.uint64(1))
    return u, v


def _gen_edges(cfg: RmatConfig):
    """All edges as arrays; chunked so chunk seeds are order-independent."""
    us, vs = [], []
    produced = 0
    chunk_index = 0
    if not cfg.simple:
        while produced < cfg.edge_count:
            n = min(_CHUNK, cfg.edge_count - produced)
            u, v = _rmat_chunk(cfg, chunk_index, n)
            us.append(u)
            vs.append(v)
            produced += n
            chunk_index += 1
        return np.concatenate(us), np.concatenate(vs)

    # Simple mode: reject self-loops and (undirected) duplicates until the
    # requested count of distinct edges is reached.
    n_vertices = 1 << cfg.scale
    max_simple = n_vertices * (n_vertices - 1) // 2
    if cfg.edge_count > max_simple:
        raise ValueError(f"{cfg.edge_count} simple edges impossible with 2^{cfg.scale} vertices")
    seen: set[int] = set()
    out_u: list[int] = []
    out_v: list[int] = []
    while len(out_u) < cfg.edge_count:
        u, v = _rmat_chunk(cfg, chunk_index, _CHUNK)
        chunk_index += 1
        for uu, vv in zip(u.tolist(), v.tolist()):
            if uu == vv:
                continue
            key = (min(uu, vv) << 32) | max(uu, vv)
            if key in seen:
                continue
            seen.add(key)
            out_u.append(uu)
            out_v.append(vv)
            if len(out_u) == cfg.edge_count:
                break
    return np.asarray(out_u, dtype=np.uint64), np.asarray(out_v, dtype=np.uint64)


def gen_rmat(cfg: RmatConfig, out_path: str) -> GenSummary:
    """Generate a graph and write it as a text edge list. Deterministic per seed."""
    us, vs = _gen_edges(cfg)
    touched = np.union1d(us, vs)
    with open(out_path, "wt", encoding="ascii") as f:
        for u, v in zip(us.tolist(), vs.tolist()):
            f.write(f"{u} {v}\n")
    return GenSummary(
        vertex_count=len(touched),
        edge_count=len(us),
        seed=cfg.seed,
        out_path=out_path,
    )
