"""Thresholded cosine-similarity graphs over embedding sets.

Pairs whose cosine similarity reaches a threshold theta are connected
with weight 1/(1 - cs). The mapping is deliberately non-linear: cs 0.9
becomes weight 10, cs 0.95 becomes 20, so near-identical pairs bind far
more tightly than pairs just above the threshold. Similarities within
1e-9 of 1 are capped so duplicate vectors produce a finite weight.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .embedding_io import MIN_VECTOR_NORM, EmbeddingSet

SIMILARITY_CAP = 1.0 - 1e-9
MAX_EDGE_WEIGHT = 1e9

# Rows are processed in fixed-size blocks; the worker count decides who
# computes a block, never its shape, so results are thread-count invariant.
_BLOCK_ROWS = 256


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not (0.0 <= theta <= SIMILARITY_CAP):
        raise ValueError(
            f"theta out of [0, 1): got {theta!r} (usable range is 0 <= theta <= {SIMILARITY_CAP})"
        )
    return theta


@dataclass
class SimilarityGraph:
    """Symmetric weighted graph in compressed sparse row form.

    degrees[a] is the weighted degree k_a (sum of row a); total_weight is
    m, each undirected edge counted once. Neighbor lists are sorted by
    index and never contain self-loops. Instances are immutable by
    convention and safe to share across threads.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    degrees: np.ndarray
    total_weight: float
    theta: float

    @property
    def edge_count(self) -> int:
        return int(self.indices.size) // 2

    def row(self, a: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor indices and weights of node a (array views, do not mutate)."""
        lo, hi = self.indptr[a], self.indptr[a + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    @classmethod
    def from_edge_list(cls, n: int, edges, theta: float = 0.0) -> "SimilarityGraph":
        """Build a graph from (a, b, weight) triples, each undirected edge once."""
        src, dst, w = [], [], []
        seen = set()
        for a, b, weight in edges:
            a, b, weight = int(a), int(b), float(weight)
            if a == b:
                raise ValueError(f"self-loop on node {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) outside node range 0..{n - 1}")
            if not np.isfinite(weight) or weight <= 0.0:
                raise ValueError(f"edge ({a}, {b}) has non-positive or non-finite weight")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            src.append(a)
            dst.append(b)
            w.append(weight)
        return _assemble(
            n,
            np.asarray(src, dtype=np.int64),
            np.asarray(dst, dtype=np.int64),
            np.asarray(w, dtype=np.float64),
            theta,
        )


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two vectors, clamped into [-1, 1]."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.ndim != 1 or va.shape != vb.shape:
        raise ValueError("vectors must be 1-d and share a dimension")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na < MIN_VECTOR_NORM or nb < MIN_VECTOR_NORM:
        raise ValueError("zero-norm vector has no cosine similarity")
    cs = float(va @ vb) / (na * nb)
    return min(1.0, max(-1.0, cs))


def edge_weight(cs: float, theta: float) -> float:
    """Map a similarity to an edge weight: 0 below theta, else 1/(1 - cs).

    Similarities at or above SIMILARITY_CAP return MAX_EDGE_WEIGHT, the
    exact value of 1/(1 - cs) at the cap, keeping the mapping finite and
    monotone.
    """
    theta = _check_theta(theta)
    cs = min(1.0, max(-1.0, float(cs)))
    if cs < theta:
        return 0.0
    if cs >= SIMILARITY_CAP:
        return MAX_EDGE_WEIGHT
    return 1.0 / (1.0 - cs)


def _edge_weights(cs: np.ndarray) -> np.ndarray:
    # vectorized body of edge_weight for values already >= theta
    den = np.maximum(1.0 - cs, 1e-9)
    w = 1.0 / den
    w[cs >= SIMILARITY_CAP] = MAX_EDGE_WEIGHT
    return w


def build_graph(emb: EmbeddingSet, theta: float, threads: int = 1) -> SimilarityGraph:
    """Connect every pair with cosine similarity >= theta.

    Exact O(n^2 d) pairwise computation over unit-normalized float64
    copies of the stored vectors, blocked by row range. threads > 1
    distributes blocks over a thread pool; 0 means one worker per CPU.
    The result is identical for every thread count.
    """
    theta = _check_theta(theta)
    n = len(emb)
    unit = emb.vectors.astype(np.float64)
    norms = np.linalg.norm(unit, axis=1)
    if (norms < MIN_VECTOR_NORM).any():
        raise ValueError("zero-norm vector cannot be placed in a similarity graph")
    unit /= norms[:, None]

    col_ids = np.arange(n)

    def upper_block(i0: int):
        # strictly upper-triangular edges of rows [i0, i0 + _BLOCK_ROWS)
        i1 = min(i0 + _BLOCK_ROWS, n)
        sims = unit[i0:i1] @ unit.T
        np.clip(sims, -1.0, 1.0, out=sims)
        mask = sims >= theta
        mask &= col_ids[None, :] > np.arange(i0, i1)[:, None]
        r, c = np.nonzero(mask)
        return r + i0, c, _edge_weights(sims[r, c])

    starts = range(0, n, _BLOCK_ROWS)
    if threads == 1:
        parts = [upper_block(i0) for i0 in starts]
    else:
        workers = threads if threads > 0 else (os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(upper_block, starts))

    src = np.concatenate([p[0] for p in parts])
    dst = np.concatenate([p[1] for p in parts])
    w = np.concatenate([p[2] for p in parts])
    return _assemble(n, src, dst, w, theta)


def _assemble(n: int, src: np.ndarray, dst: np.ndarray, w: np.ndarray, theta: float) -> SimilarityGraph:
    # mirror the one-per-edge arrays into a symmetric CSR
    rows = np.concatenate([src, dst])
    cols = np.concatenate([dst, src])
    ww = np.concatenate([w, w])
    order = np.lexsort((cols, rows))
    rows = rows[order]
    indices = cols[order]
    weights = ww[order]
    counts = np.bincount(rows, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    degrees = np.bincount(rows, weights=weights, minlength=n)
    return SimilarityGraph(
        n=n,
        indptr=indptr,
        indices=indices.astype(np.int64),
        weights=weights,
        degrees=degrees,
        total_weight=float(w.sum()),
        theta=theta,
    )


def induced_subgraph(g: SimilarityGraph, nodes) -> SimilarityGraph:
    """Restrict the graph to `nodes`, renumbering them 0..len(nodes)-1.

    Edge weights are reused as-is; the construction threshold is never
    re-applied. `nodes` must be unique; order is normalized to ascending.
    """
    nodes = np.unique(np.asarray(nodes, dtype=np.int64))
    if nodes.size and (nodes[0] < 0 or nodes[-1] >= g.n):
        raise ValueError("subgraph nodes outside node range")
    newid = np.full(g.n, -1, dtype=np.int64)
    newid[nodes] = np.arange(nodes.size)
    rows_all = np.repeat(np.arange(g.n), np.diff(g.indptr))
    mask = (newid[rows_all] >= 0) & (newid[g.indices] >= 0)
    rows = newid[rows_all[mask]]
    cols = newid[g.indices[mask]]
    ww = g.weights[mask]
    m = nodes.size
    counts = np.bincount(rows, minlength=m)
    indptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return SimilarityGraph(
        n=m,
        indptr=indptr,
        indices=cols,
        weights=ww,
        degrees=np.bincount(rows, weights=ww, minlength=m),
        total_weight=float(ww.sum()) / 2.0,
        theta=g.theta,
    )


def write_edges_tsv(g: SimilarityGraph, ids: list[str], path) -> None:
    """Export the edge list as "src_id<TAB>dst_id<TAB>weight", one line per edge.

    Each undirected edge appears once with src index < dst index; weights
    are printed with 12 significant digits.
    """
    if len(ids) != g.n:
        raise ValueError("id list does not match graph size")
    with open(path, "w", encoding="utf-8") as fh:
        for a in range(g.n):
            nbrs, ws = g.row(a)
            for b, weight in zip(nbrs.tolist(), ws.tolist()):
                if b > a:
                    fh.write(f"{ids[a]}\t{ids[b]}\t{weight:.12g}\n")
