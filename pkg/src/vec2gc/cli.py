"""Command-line pipeline: graph export, clustering, evaluation, baseline.

Every run that involves randomness flows from one --seed; omitting it
generates a seed that is printed and written to the run manifest, so no
silent unreproducible run can occur. Exit codes: 0 success, 1 user or
input error, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .community import LouvainConfig
from .embedding_io import load_embeddings, load_labels
from .evaluation import format_report_table, kmedoids, purity_report, report_to_json_dict
from .hierarchy import dumps_tree, leaf_clusters_from_document, vec2gc_cluster
from .simgraph import build_graph, write_edges_tsv

FORMAT_ALIASES = {"word2vec": "word2vec_text", "csv": "csv", "jsonl": "jsonl"}


@dataclass
class RunConfig:
    """Everything a clustering run depends on; the manifest serializes it."""

    input: str
    format: str
    labels: str | None
    theta: float
    mod_threshold: float
    max_size: int
    min_community_size: int
    seed: int
    gain_epsilon: float
    max_sweeps: int
    threads: int
    output: str
    seed_generated: bool = False

    def parameters(self) -> dict:
        return {
            "input": self.input,
            "format": self.format,
            "labels": self.labels,
            "theta": self.theta,
            "mod_threshold": self.mod_threshold,
            "max_size": self.max_size,
            "min_community_size": self.min_community_size,
            "seed": self.seed,
            "gain_epsilon": self.gain_epsilon,
            "max_sweeps": self.max_sweeps,
            "threads": self.threads,
            "output": self.output,
        }


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _resolve_seed(seed: int | None) -> tuple[int, bool]:
    if seed is not None:
        return int(seed), False
    generated = int.from_bytes(os.urandom(8), "little")
    return generated, True


def _load_input(path: str, format_alias: str):
    return load_embeddings(path, FORMAT_ALIASES[format_alias])


def _write_json(path, document) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(document, indent=2) + "\n")


def cmd_graph(args) -> int:
    emb = _load_input(args.input, args.format)
    g = build_graph(emb, args.theta, threads=args.threads)
    write_edges_tsv(g, emb.ids, args.output)
    print(f"wrote {g.edge_count} edges over {g.n} nodes to {args.output}")
    return 0


def cmd_cluster(args) -> int:
    if args.from_manifest:
        with open(args.from_manifest, encoding="utf-8") as fh:
            manifest = json.load(fh)
        params = manifest["parameters"]
        try:
            config = RunConfig(**params)
        except TypeError as exc:
            raise ValueError(f"manifest parameters are incomplete: {exc}") from None
        if args.output:
            config.output = args.output
        recorded = manifest.get("input_sha256")
        if recorded and _sha256(config.input) != recorded:
            raise ValueError(f"input file {config.input} does not match the manifest checksum")
    else:
        if args.input is None or args.theta is None:
            raise ValueError("cluster requires --input and --theta (or --from-manifest)")
        seed, generated = _resolve_seed(args.seed)
        config = RunConfig(
            input=args.input,
            format=args.format,
            labels=args.labels,
            theta=args.theta,
            mod_threshold=args.mod_threshold,
            max_size=args.max_size,
            min_community_size=args.min_community_size,
            seed=seed,
            gain_epsilon=args.gain_epsilon,
            max_sweeps=args.max_sweeps,
            threads=args.threads,
            output=args.output or "tree.json",
            seed_generated=generated,
        )

    print(f"seed: {config.seed}" + (" (generated)" if config.seed_generated else ""))
    emb = _load_input(config.input, config.format)
    g = build_graph(emb, config.theta, threads=config.threads)
    louvain_config = LouvainConfig(
        gain_epsilon=config.gain_epsilon,
        max_sweeps=config.max_sweeps,
        threads=config.threads if config.threads > 0 else (os.cpu_count() or 1),
    )
    tree, bucket = vec2gc_cluster(
        g,
        config.mod_threshold,
        config.max_size,
        config.seed,
        min_community_size=config.min_community_size,
        config=louvain_config,
    )
    text = dumps_tree(
        tree,
        bucket,
        emb.ids,
        theta=config.theta,
        mod_threshold=config.mod_threshold,
        max_size=config.max_size,
        seed=config.seed,
    )
    with open(config.output, "w", encoding="utf-8") as fh:
        fh.write(text)

    manifest_path = args.manifest or str(Path(config.output).with_suffix(".manifest.json"))
    manifest = {
        "tool": "vec2gc",
        "version": __version__,
        "command": "cluster",
        "parameters": config.parameters(),
        "input_sha256": _sha256(config.input),
        "labels_sha256": _sha256(config.labels) if config.labels else None,
        "seed_generated": config.seed_generated,
    }
    _write_json(manifest_path, manifest)
    leaves = sum(1 for node in tree.nodes if node.is_leaf)
    print(
        f"wrote {config.output} ({leaves} leaf clusters,"
        f" {len(bucket.members)} non-community items); manifest: {manifest_path}"
    )
    return 0


def _parse_thresholds(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"unparseable purity thresholds {text!r}") from None
    if not values:
        raise ValueError("no purity thresholds given")
    return values


def cmd_evaluate(args) -> int:
    with open(args.tree, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{args.tree}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    labels = load_labels(args.labels, has_header=args.labels_header)
    thresholds = _parse_thresholds(args.purity_thresholds)
    clusters, noise = leaf_clusters_from_document(doc)
    report = purity_report(clusters, labels, thresholds=thresholds, noise_size=len(noise))
    if report.unlabeled_members or report.clusters_without_labels:
        print(
            f"warning: {report.unlabeled_members} members lack labels"
            f" ({report.clusters_without_labels} clusters skipped entirely);"
            " evaluated the rest",
            file=sys.stderr,
        )
    if args.output:
        _write_json(args.output, report_to_json_dict(report))
    print(format_report_table(report))
    return 0


def cmd_baseline_kmedoids(args) -> int:
    emb = _load_input(args.input, args.format)
    if args.labels:
        labels = load_labels(args.labels, has_header=args.labels_header)
    elif emb.labels:
        labels = emb.labels
    else:
        raise ValueError("baseline evaluation needs labels (--labels or jsonl label fields)")
    seed, generated = _resolve_seed(args.seed)
    print(f"seed: {seed}" + (" (generated)" if generated else ""))
    clusters = kmedoids(emb, args.k, seed, max_iters=args.max_iters)
    id_clusters = [[emb.ids[i] for i in members] for members in clusters]
    thresholds = _parse_thresholds(args.purity_thresholds)
    report = purity_report(id_clusters, labels, thresholds=thresholds, noise_size=0)
    if args.output:
        _write_json(args.output, report_to_json_dict(report))
    print(format_report_table(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vec2gc", description=__doc__)
    parser.add_argument("--version", action="version", version=f"vec2gc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input_args(p):
        p.add_argument("--input", help="embedding file")
        p.add_argument("--format", choices=sorted(FORMAT_ALIASES), default="jsonl", help="embedding file format")

    graph = sub.add_parser("graph", help="export the thresholded similarity graph as TSV edges")
    add_input_args(graph)
    graph.add_argument("--theta", type=float, required=True, help="cosine similarity threshold in [0, 1)")
    graph.add_argument("--threads", type=int, default=1, help="worker threads (0 = one per CPU)")
    graph.add_argument("--output", required=True, help="edge TSV path")
    graph.set_defaults(func=cmd_graph)

    cluster = sub.add_parser("cluster", help="build the similarity graph and cluster it recursively")
    add_input_args(cluster)
    cluster.add_argument("--labels", help="optional id<TAB>label file recorded in the manifest")
    cluster.add_argument(
        "--theta", type=float,
        help="cosine similarity threshold in [0, 1); no default, 0.7 is a reasonable start for unit-normalized document embeddings",
    )
    cluster.add_argument("--mod-threshold", type=float, default=0.3, help="stop splitting below this modularity")
    cluster.add_argument("--max-size", type=int, default=500, help="communities above this size are split again")
    cluster.add_argument("--min-community-size", type=int, default=2, help="smaller communities become non-community items")
    cluster.add_argument("--seed", type=int, help="random seed; generated and printed when omitted")
    cluster.add_argument("--gain-epsilon", type=float, default=1e-9, help="smallest modularity gain that still counts as a move")
    cluster.add_argument("--max-sweeps", type=int, default=100, help="move sweeps per optimizer level")
    cluster.add_argument("--threads", type=int, default=1, help="worker threads (0 = one per CPU); 1 is the canonical reproducible mode")
    cluster.add_argument("--output", help="tree JSON path (default tree.json)")
    cluster.add_argument("--manifest", help="manifest path (default: output with .manifest.json suffix)")
    cluster.add_argument("--from-manifest", help="rerun the exact configuration recorded in a manifest")
    cluster.set_defaults(func=cmd_cluster)

    evaluate = sub.add_parser("evaluate", help="purity report for a tree JSON against gold labels")
    evaluate.add_argument("--tree", required=True, help="tree JSON produced by the cluster command")
    evaluate.add_argument("--labels", required=True, help="id<TAB>label file")
    evaluate.add_argument("--labels-header", action="store_true", help="skip the first line of the label file")
    evaluate.add_argument("--purity-thresholds", default="0.5,0.7,0.9", help="comma-separated thresholds in (0, 1]")
    evaluate.add_argument("--output", help="optional report JSON path")
    evaluate.set_defaults(func=cmd_evaluate)

    baseline = sub.add_parser("baseline", help="reference clustering methods")
    baseline_sub = baseline.add_subparsers(dest="method", required=True)
    kmed = baseline_sub.add_parser("kmedoids", help="k-medoids on cosine distance with spread-out seeding")
    add_input_args(kmed)
    kmed.add_argument("--labels", help="id<TAB>label file (optional for jsonl with inline labels)")
    kmed.add_argument("--labels-header", action="store_true", help="skip the first line of the label file")
    kmed.add_argument("--k", type=int, required=True, help="number of clusters")
    kmed.add_argument("--seed", type=int, help="random seed; generated and printed when omitted")
    kmed.add_argument("--max-iters", type=int, default=100, help="medoid update iterations")
    kmed.add_argument("--purity-thresholds", default="0.5,0.7,0.9", help="comma-separated thresholds in (0, 1]")
    kmed.add_argument("--output", help="optional report JSON path")
    kmed.set_defaults(func=cmd_baseline_kmedoids)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        print(f"error: missing field {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything else is a broken invariant, not bad input
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
