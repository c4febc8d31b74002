"""Recursive community clustering into a tree plus a non-community bucket.

Each (sub)graph is partitioned by the modularity optimizer. When the
partition's modularity falls below mod_threshold, or only one community
emerges, the node becomes a leaf. Otherwise communities larger than
max_size are recursed into (their induced subgraphs keep the original
edge weights; the similarity threshold is never re-applied), smaller
ones become leaf children, and communities below min_community_size join
the non-community bucket, as do items isolated by the threshold itself.
"""

from __future__ import annotations

import hashlib
import json
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .community import LouvainConfig, louvain, members_by_community
from .simgraph import SimilarityGraph, induced_subgraph

REASON_ISOLATED = "isolated"
REASON_SINGLETON = "singleton_community"

_MASK64 = (1 << 64) - 1


def derive_seed(parent_seed: int, child_index: int) -> int:
    """Stable per-child seed so sibling subtrees draw independent streams."""
    packed = struct.pack("<QQ", parent_seed & _MASK64, child_index & _MASK64)
    return int.from_bytes(hashlib.blake2b(packed, digest_size=8).digest(), "little")


@dataclass
class TreeNode:
    id: int
    parent: int | None
    children: list[int]
    members: list[int]
    split_modularity: float | None
    is_leaf: bool


@dataclass
class ClusterTree:
    """Hierarchy of cluster nodes; ids are depth-first preorder, root first."""

    nodes: list[TreeNode] = field(default_factory=list)
    root: int | None = None


@dataclass
class NonCommunityBucket:
    """Items excluded from the tree, with the reason per item."""

    members: list[int] = field(default_factory=list)
    reasons: dict[int, str] = field(default_factory=dict)


@dataclass
class _BuildNode:
    members: list[int] | None
    children: list["_BuildNode"]
    split_modularity: float | None


def vec2gc_cluster(
    g: SimilarityGraph,
    mod_threshold: float,
    max_size: int,
    seed: int,
    min_community_size: int = 2,
    config: LouvainConfig | None = None,
) -> tuple[ClusterTree, NonCommunityBucket]:
    """Recursively split a similarity graph into a cluster tree.

    Returns the tree and the non-community bucket; together their leaf
    members partition the graph's nodes exactly. Deterministic for fixed
    (graph, mod_threshold, max_size, seed, config.threads).
    """
    if not (0.0 <= float(mod_threshold) < 1.0):
        raise ValueError(f"mod_threshold out of [0, 1): got {mod_threshold!r}")
    if int(max_size) < 1:
        raise ValueError("max_size must be at least 1")
    if int(min_community_size) < 1:
        raise ValueError("min_community_size must be at least 1")
    config = config or LouvainConfig()

    bucket = NonCommunityBucket()

    degree_counts = np.diff(g.indptr)
    for a in np.nonzero(degree_counts == 0)[0].tolist():
        bucket.members.append(a)
        bucket.reasons[a] = REASON_ISOLATED

    active = np.nonzero(degree_counts > 0)[0]
    if active.size == 0:
        warnings.warn("similarity graph has no edges; every item is non-community")
        bucket.members.sort()
        return ClusterTree(), bucket

    def build(sub_g: SimilarityGraph, corpus_idx: np.ndarray, node_seed: int) -> _BuildNode | None:
        part = louvain(sub_g, node_seed, config)
        if part.community_count == 1 or part.modularity < mod_threshold:
            return _BuildNode(members=sorted(corpus_idx.tolist()), children=[], split_modularity=None)
        children: list[_BuildNode] = []
        for ci, local in enumerate(members_by_community(part.assignment)):
            corpus = corpus_idx[local]
            if corpus.size < min_community_size:
                for a in corpus.tolist():
                    bucket.members.append(a)
                    bucket.reasons[a] = REASON_SINGLETON
            elif corpus.size <= max_size:
                children.append(_BuildNode(sorted(corpus.tolist()), [], None))
            else:
                child = build(induced_subgraph(sub_g, local), corpus, derive_seed(node_seed, ci))
                if child is not None:
                    children.append(child)
        if not children:
            return None
        return _BuildNode(members=None, children=children, split_modularity=part.modularity)

    work = induced_subgraph(g, active) if active.size < g.n else g
    root = build(work, active, seed)
    bucket.members.sort()
    if root is None:
        warnings.warn("every community fell below min_community_size; tree is empty")
        return ClusterTree(), bucket
    return _flatten(root), bucket


def _flatten(root: _BuildNode) -> ClusterTree:
    _fill_members(root)
    tree = ClusterTree(nodes=[], root=0)

    def emit(bnode: _BuildNode, parent: int | None) -> int:
        node_id = len(tree.nodes)
        node = TreeNode(
            id=node_id,
            parent=parent,
            children=[],
            members=bnode.members,
            split_modularity=bnode.split_modularity,
            is_leaf=not bnode.children,
        )
        tree.nodes.append(node)
        for child in bnode.children:
            node.children.append(emit(child, node_id))
        return node_id

    emit(root, None)
    return tree


def _fill_members(bnode: _BuildNode) -> list[int]:
    if bnode.members is None:
        merged: list[int] = []
        for child in bnode.children:
            merged.extend(_fill_members(child))
        merged.sort()
        bnode.members = merged
    return bnode.members


def flat_clusters(tree: ClusterTree) -> list[list[int]]:
    """Leaf member lists in depth-first, child-order traversal."""
    if tree.root is None:
        return []
    out: list[list[int]] = []
    stack = [tree.root]
    while stack:
        node = tree.nodes[stack.pop()]
        if node.is_leaf:
            out.append(list(node.members))
        else:
            stack.extend(reversed(node.children))
    return out


def tree_document(
    tree: ClusterTree,
    bucket: NonCommunityBucket,
    ids: list[str],
    *,
    theta: float,
    mod_threshold: float,
    max_size: int,
    seed: int,
) -> dict:
    """JSON-ready document for a clustering run; key order is stable."""
    nodes_json = []
    for node in tree.nodes:
        nodes_json.append(
            {
                "id": node.id,
                "parent": node.parent,
                "children": list(node.children),
                "members": [ids[i] for i in node.members],
                "split_modularity": node.split_modularity,
            }
        )
    return {
        "theta": theta,
        "mod_threshold": mod_threshold,
        "max_size": max_size,
        "seed": seed,
        "nodes": nodes_json,
        "non_community": {
            "members": [ids[i] for i in bucket.members],
            "reasons": {ids[i]: bucket.reasons[i] for i in bucket.members},
        },
    }


def dumps_tree(
    tree: ClusterTree,
    bucket: NonCommunityBucket,
    ids: list[str],
    *,
    theta: float,
    mod_threshold: float,
    max_size: int,
    seed: int,
) -> str:
    doc = tree_document(
        tree, bucket, ids, theta=theta, mod_threshold=mod_threshold, max_size=max_size, seed=seed
    )
    return json.dumps(doc, indent=2) + "\n"


def leaf_clusters_from_document(doc: dict) -> tuple[list[list[str]], list[str]]:
    """Leaf member-id lists (depth-first child order) and bucket ids from a tree document."""
    if not isinstance(doc, dict):
        raise ValueError("tree document must be a JSON object")
    nodes = doc.get("nodes", [])
    if not isinstance(nodes, list):
        raise ValueError('tree document has no "nodes" list')
    by_id = {}
    roots = []
    for node in nodes:
        by_id[node["id"]] = node
        if node.get("parent") is None:
            roots.append(node["id"])
    leaves: list[list[str]] = []
    stack = list(reversed(roots))
    while stack:
        node = by_id[stack.pop()]
        children = node.get("children", [])
        if children:
            stack.extend(reversed(children))
        else:
            leaves.append(list(node["members"]))
    noise = list(doc.get("non_community", {}).get("members", []))
    return leaves, noise
