"""Weighted modularity and a seeded Louvain optimizer.

The optimizer is the classic two-phase scheme: sweeps of single-node
moves until none improves modularity by more than gain_epsilon, then
aggregation of communities into super-nodes, repeated until a level
stops improving. A final move phase runs against the original graph so
the returned partition is locally optimal node-by-node, not only
super-node-by-super-node.
"""

from __future__ import annotations

import heapq
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LouvainConfig:
    """Knobs of the optimizer; defaults favor reproducibility over speed.

    restarts runs the whole multi-level pass that many times, the first
    from singleton communities, the rest from seeded random partitions,
    keeping the best-modularity result. Dense weighted graphs have local
    maxima that a single greedy pass lands in; restarts escape them.
    """

    gain_epsilon: float = 1e-9
    max_sweeps: int = 100
    max_levels: int = 50
    restarts: int = 16
    threads: int = 1


@dataclass
class WeightedGraph:
    """CSR graph as produced by aggregation; may carry self-loops.

    A self-loop is stored at its full adjacency-matrix value (twice the
    loop mass), so degrees stay equal to row sums and total_weight to
    degrees.sum() / 2, matching the plain-graph conventions.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    degrees: np.ndarray
    total_weight: float


@dataclass
class Partition:
    """Node-to-community assignment with its cached modularity.

    Community ids are dense integers 0..community_count-1, numbered by
    first occurrence in node order.
    """

    assignment: np.ndarray
    community_count: int
    modularity: float


def members_by_community(assignment) -> list[np.ndarray]:
    """Group node indices by dense community id, ascending within each group."""
    assignment = np.asarray(assignment, dtype=np.int64)
    order = np.argsort(assignment, kind="stable")
    counts = np.bincount(assignment)
    return np.split(order, np.cumsum(counts)[:-1])


def modularity(g, assignment) -> float:
    """Modularity Q of a community assignment over a weighted graph.

    Q sums, over ordered node pairs in the same community, the edge
    weight minus the degree-product expectation k_a*k_b/(2m), normalized
    by 2m. Diagonal entries participate at their stored value, which is 0
    for thresholded similarity graphs and twice the loop mass for
    aggregated ones.
    """
    assignment = np.asarray(assignment, dtype=np.int64)
    if assignment.shape != (g.n,):
        raise ValueError("assignment must cover every node exactly once")
    if g.total_weight <= 0.0:
        raise ValueError("modularity is undefined on a graph with no edges")
    n_comm = int(assignment.max()) + 1
    rows = np.repeat(np.arange(g.n), np.diff(g.indptr))
    same = assignment[rows] == assignment[g.indices]
    # Per-node in-community sums first, then per-community totals: the
    # grouping then matches the degrees computation, so the all-in-one
    # partition cancels to exactly zero.
    node_in = np.bincount(rows[same], weights=g.weights[same], minlength=g.n)
    w_in = np.bincount(assignment, weights=node_in, minlength=n_comm)
    k_tot = np.bincount(assignment, weights=g.degrees, minlength=n_comm)
    two_m = float(k_tot.sum())
    frac = k_tot / two_m
    return float((w_in / two_m - frac * frac).sum())


def move_gain(g, assignment, node: int, target: int) -> float:
    """Exact modularity change from moving one node into a target community."""
    assignment = np.asarray(assignment, dtype=np.int64)
    current = int(assignment[node])
    if target == current:
        return 0.0
    two_m = float(g.degrees.sum())
    k_a = float(g.degrees[node])
    nbrs, ws = g.row(node)
    nbr_comm = assignment[nbrs]
    not_self = nbrs != node
    k_in_cur = float(ws[(nbr_comm == current) & not_self].sum())
    k_in_tgt = float(ws[(nbr_comm == target) & not_self].sum())
    k_tot = np.bincount(assignment, weights=g.degrees, minlength=max(int(assignment.max()), target) + 1)
    sigma_cur = float(k_tot[current]) - k_a
    sigma_tgt = float(k_tot[target])
    return 2.0 * ((k_in_tgt - sigma_tgt * k_a / two_m) - (k_in_cur - sigma_cur * k_a / two_m)) / two_m


def aggregate_graph(g, assignment) -> WeightedGraph:
    """Collapse communities into super-nodes; intra weight becomes loop mass.

    The induced identity partition on the result has the same modularity
    as `assignment` on `g`.
    """
    assignment = np.asarray(assignment, dtype=np.int64)
    n_comm = int(assignment.max()) + 1
    indptr, indices, weights = _aggregate_csr(g.indptr, g.indices, g.weights, assignment, n_comm)
    rows = np.repeat(np.arange(n_comm), np.diff(indptr))
    degrees = np.bincount(rows, weights=weights, minlength=n_comm)
    return WeightedGraph(
        n=n_comm,
        indptr=indptr,
        indices=indices,
        weights=weights,
        degrees=degrees,
        total_weight=float(degrees.sum()) / 2.0,
    )


def louvain(g, seed: int = 0, config: LouvainConfig | None = None) -> Partition:
    """Modularity-maximizing partition of a weighted graph.

    Deterministic for a fixed (seed, config.threads): node visit order is
    a seeded shuffle per sweep, equal-gain targets resolve to the
    smallest community id, restart ties to the earliest restart, and
    parallel sweeps commit proposals in a fixed chunk order. threads == 1
    is the canonical reproducible mode.
    """
    config = config or LouvainConfig()
    if g.total_weight <= 0.0:
        raise ValueError("community detection requires a graph with at least one edge")

    best: Partition | None = None
    for restart in range(max(1, config.restarts)):
        rng = np.random.default_rng((int(seed) & _SEED_MASK, restart))
        if restart == 0:
            init = None
        else:
            groups = int(rng.integers(2, g.n + 1)) if g.n > 1 else 1
            init, _ = _dense_relabel(rng.integers(0, groups, size=g.n).tolist())
        part = _louvain_pass(g, rng, config, init)
        if best is None or part.modularity > best.modularity:
            best = part
    return best


_SEED_MASK = (1 << 64) - 1


def _louvain_pass(g, rng, config: LouvainConfig, init) -> Partition:
    indptr, indices, weights = g.indptr, g.indices, g.weights
    node_map = np.arange(g.n)
    if init is not None:
        comm, _ = _move_phase(indptr, indices, weights, rng, config, init=init)
        node_map, n_comm = _dense_relabel(comm)
        if n_comm < g.n:
            indptr, indices, weights = _aggregate_csr(g.indptr, g.indices, g.weights, node_map, n_comm)
    for _ in range(config.max_levels):
        comm, moved = _move_phase(indptr, indices, weights, rng, config)
        if not moved:
            break
        dense, n_comm = _dense_relabel(comm)
        node_map = dense[node_map]
        if n_comm == len(indptr) - 1:
            break
        indptr, indices, weights = _aggregate_csr(indptr, indices, weights, dense, n_comm)

    # Refinement against the original graph: aggregation only guarantees
    # super-node optimality, single nodes may still have good moves left.
    final_comm, _ = _move_phase(g.indptr, g.indices, g.weights, rng, config, init=node_map)
    assignment, count = _dense_relabel(final_comm)
    return Partition(assignment=assignment, community_count=count, modularity=modularity(g, assignment))


def _dense_relabel(comm) -> tuple[np.ndarray, int]:
    out = np.empty(len(comm), dtype=np.int64)
    mapping: dict[int, int] = {}
    for i, c in enumerate(comm):
        out[i] = mapping.setdefault(int(c), len(mapping))
    return out, len(mapping)


def _aggregate_csr(indptr, indices, weights, dense, n_comm):
    n = len(indptr) - 1
    rows = np.repeat(np.arange(n), np.diff(indptr))
    key = dense[rows] * n_comm + dense[indices]
    order = np.argsort(key, kind="stable")
    keys = key[order]
    uniq, starts = np.unique(keys, return_index=True)
    sums = np.add.reduceat(weights[order], starts)
    rr = uniq // n_comm
    cc = uniq % n_comm
    counts = np.bincount(rr, minlength=n_comm)
    new_indptr = np.zeros(n_comm + 1, dtype=np.int64)
    np.cumsum(counts, out=new_indptr[1:])
    return new_indptr, cc.astype(np.int64), sums


def _move_phase(indptr, indices, weights, rng, config, init=None):
    """Single-node move sweeps until no move beats gain_epsilon.

    Returns (community list, whether anything moved). Plain-Python lists
    throughout: the loop is branch-heavy and element access dominates.
    """
    n = len(indptr) - 1
    ptr = indptr.tolist()
    nbr = indices.tolist()
    wt = weights.tolist()
    k = [0.0] * n
    for a in range(n):
        total = 0.0
        for idx in range(ptr[a], ptr[a + 1]):
            total += wt[idx]
        k[a] = total
    two_m = sum(k)
    eps = config.gain_epsilon * two_m / 2.0

    comm = list(range(n)) if init is None else [int(c) for c in init]
    size = [0] * n
    for c in comm:
        size[c] += 1
    free = [c for c in range(n) if size[c] == 0]
    heapq.heapify(free)

    moved_any = False
    parallel = config.threads > 1
    for _ in range(config.max_sweeps):
        sigma = [0.0] * n
        for a in range(n):
            sigma[comm[a]] += k[a]
        order = rng.permutation(n)
        if parallel:
            moves = _parallel_sweep(order, ptr, nbr, wt, k, two_m, eps, comm, sigma, size, free, config.threads)
            if moves == 0:
                # proposals exhausted; reconcile with sequential sweeps
                parallel = False
                continue
        else:
            moves = _sequential_sweep(order.tolist(), ptr, nbr, wt, k, two_m, eps, comm, sigma, size, free)
            if moves == 0:
                break
        moved_any = True
    return comm, moved_any


def _best_target(a, ptr, nbr, wt, k, two_m, comm, sigma, size, removed):
    """Best community for node a and its gain, against current state.

    `removed` says whether sigma/size already exclude node a. Returns
    (target, gain, base) where base is the gain of staying put; target is
    -1 when standing alone beats every adjacent community.
    """
    c = comm[a]
    acc: dict[int, float] = {}
    for idx in range(ptr[a], ptr[a + 1]):
        b = nbr[idx]
        if b != a:
            d = comm[b]
            acc[d] = acc.get(d, 0.0) + wt[idx]
    k_a = k[a]
    sigma_cur = sigma[c] - (0.0 if removed else k_a)
    base = acc.get(c, 0.0) - sigma_cur * k_a / two_m
    best_c = c
    best_gain = base
    for d in sorted(acc):
        if d == c:
            continue
        gain = acc[d] - sigma[d] * k_a / two_m
        if gain > best_gain:
            best_c, best_gain = d, gain
    remaining = size[c] - (0 if removed else 1)
    if remaining > 0 and 0.0 > best_gain:
        return -1, 0.0, base
    return best_c, best_gain, base


def _sequential_sweep(order, ptr, nbr, wt, k, two_m, eps, comm, sigma, size, free):
    moves = 0
    for a in order:
        if ptr[a] == ptr[a + 1]:
            continue
        c = comm[a]
        sigma[c] -= k[a]
        size[c] -= 1
        target, gain, base = _best_target(a, ptr, nbr, wt, k, two_m, comm, sigma, size, removed=True)
        if (gain - base) > eps and target != c:
            if target == -1:
                target = heapq.heappop(free)
            comm[a] = target
            sigma[target] += k[a]
            size[target] += 1
            if size[c] == 0:
                heapq.heappush(free, c)
            moves += 1
        else:
            sigma[c] += k[a]
            size[c] += 1
    return moves


def _parallel_sweep(order, ptr, nbr, wt, k, two_m, eps, comm, sigma, size, free, threads):
    """Chunked sweep: proposals read a frozen snapshot, commits run in chunk order."""
    chunks = [c for c in np.array_split(order, threads) if c.size]
    snap_comm = list(comm)
    snap_sigma = list(sigma)
    snap_size = list(size)

    def propose(chunk):
        out = []
        for a in chunk.tolist():
            if ptr[a] == ptr[a + 1]:
                continue
            target, gain, base = _best_target(
                a, ptr, nbr, wt, k, two_m, snap_comm, snap_sigma, snap_size, removed=False
            )
            if (gain - base) > eps and target != snap_comm[a]:
                out.append((a, target))
        return out

    with ThreadPoolExecutor(max_workers=threads) as pool:
        proposals = list(pool.map(propose, chunks))

    moves = 0
    for chunk_moves in proposals:
        for a, target in chunk_moves:
            c = comm[a]
            sigma[c] -= k[a]
            size[c] -= 1
            if target == -1:
                gain = 0.0
                remaining_ok = size[c] > 0
            else:
                # revalidate the proposed target against the live state
                k_in = 0.0
                for idx in range(ptr[a], ptr[a + 1]):
                    b = nbr[idx]
                    if b != a and comm[b] == target:
                        k_in += wt[idx]
                gain = k_in - sigma[target] * k[a] / two_m
                remaining_ok = True
            k_in_cur = 0.0
            for idx in range(ptr[a], ptr[a + 1]):
                b = nbr[idx]
                if b != a and comm[b] == c:
                    k_in_cur += wt[idx]
            base = k_in_cur - sigma[c] * k[a] / two_m
            if remaining_ok and (gain - base) > eps:
                if target == -1:
                    target = heapq.heappop(free)
                comm[a] = target
                sigma[target] += k[a]
                size[target] += 1
                if size[c] == 0:
                    heapq.heappush(free, c)
                moves += 1
            else:
                sigma[c] += k[a]
                size[c] += 1
    return moves
