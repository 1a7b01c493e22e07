"""Multi-feature runs: per-feature graphs, graph fusion, late (Borda) fusion.

Feature names:
  tfidf      cosine distance between tf-idf vectors
  emb-mean   cosine distance between static-embedding means
  bert-mean  cosine distance between contextual token-matrix means
  tss        max-cosine text semantic similarity distance
  wmd        exact transport distance between nBOW distributions
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import TaskUnit
from .errors import ResourceError
from .features import (
    EmbeddingTable,
    build_sentence_features,
    compute_tfidf,
    nbow_distribution,
    sentence_mean_embedding,
    token_vectors,
)
from .selection import (
    Partition,
    SelectionConfig,
    SelectionResult,
    borda_fuse,
    default_partition_count,
    greedy_select,
    lazy_greedy_select,
    partition_sentences,
    unit_byte_lens,
    unit_costs,
)
from .similarity import (
    SimilarityGraph,
    build_graph,
    dense_cosine_distances,
    fuse_graphs,
    tfidf_distances,
    tss_distances,
    wmd_distances,
)

FEATURES = ("tfidf", "emb-mean", "bert-mean", "tss", "wmd")

# Mirrors the default combined set: n-grams plus contextual means plus the
# two embedding-space distances.
DEFAULT_FUSION_FEATURES = ("tfidf", "bert-mean", "wmd", "tss")


@dataclass
class FeatureResources:
    """External inputs a feature may need."""

    table: EmbeddingTable | None = None  # static word vectors
    contextual: list[np.ndarray | None] | None = None  # per-sentence matrices


def feature_distances(unit: TaskUnit, feature: str, resources: FeatureResources) -> np.ndarray:
    """Pairwise distance matrix for one feature source."""
    sents = unit.sentences
    if feature == "tfidf":
        return tfidf_distances(compute_tfidf(unit))
    if feature == "emb-mean":
        if resources.table is None:
            raise ResourceError("feature 'emb-mean' needs static embeddings (--embeddings)")
        means = [sentence_mean_embedding(s, resources.table) for s in sents]
        return dense_cosine_distances(means)
    if feature == "bert-mean":
        if resources.contextual is None:
            raise ResourceError("feature 'bert-mean' needs contextual embeddings (--contextual)")
        means = [
            m.mean(axis=0) if m is not None and m.shape[0] > 0 else None
            for m in resources.contextual
        ]
        return dense_cosine_distances(means)
    if feature == "tss":
        if resources.table is not None:
            mats = [token_vectors(s, resources.table) for s in sents]
        elif resources.contextual is not None:
            mats = resources.contextual
        else:
            raise ResourceError(
                "feature 'tss' needs static or contextual embeddings (--embeddings/--contextual)"
            )
        return tss_distances(mats)
    if feature == "wmd":
        if resources.table is None:
            raise ResourceError("feature 'wmd' needs static embeddings (--embeddings)")
        nbows = [nbow_distribution(s, resources.table) for s in sents]
        return wmd_distances(nbows)
    raise ResourceError(f"unknown feature {feature!r}")


def build_feature_graph(
    unit: TaskUnit,
    feature: str,
    resources: FeatureResources,
    k_nn: int = 7,
) -> SimilarityGraph:
    """Distance matrix -> locally scaled similarity graph for one feature.

    ``k_nn`` is clamped to n-1 for tiny units; a single-sentence unit gets
    the trivial one-vertex graph.
    """
    if unit.n == 1:
        return SimilarityGraph(w=np.ones((1, 1)), meta=feature, k_nn=0)
    d = feature_distances(unit, feature, resources)
    return build_graph(d, min(k_nn, unit.n - 1), meta=feature)


def make_partition(unit: TaskUnit, config: SelectionConfig) -> Partition:
    feats = build_sentence_features(unit)
    k = min(config.k_partitions, unit.n)
    return partition_sentences(feats, k, config.seed)


def _select(graph, partition, costs, config, byte_lens) -> SelectionResult:
    fn = lazy_greedy_select if config.lazy else greedy_select
    return fn(graph, partition, costs, config, byte_lens)


def run_feature(
    unit: TaskUnit,
    feature: str,
    resources: FeatureResources,
    config: SelectionConfig,
    k_nn: int = 7,
    partition: Partition | None = None,
) -> tuple[SimilarityGraph, SelectionResult]:
    """One feature end to end: graph construction plus greedy selection."""
    graph = build_feature_graph(unit, feature, resources, k_nn)
    if partition is None:
        partition = make_partition(unit, config)
    result = _select(graph, partition, unit_costs(unit), config, unit_byte_lens(unit))
    return graph, result


def run_graph_fusion(
    unit: TaskUnit,
    features: list[str],
    weights: list[float],
    resources: FeatureResources,
    config: SelectionConfig,
    k_nn: int = 7,
) -> tuple[list[SimilarityGraph], SimilarityGraph, SelectionResult]:
    """Weighted-average fusion of per-feature graphs, then one selection."""
    graphs = [build_feature_graph(unit, f, resources, k_nn) for f in features]
    fused = fuse_graphs(graphs, weights) if len(graphs) > 1 else graphs[0]
    partition = make_partition(unit, config)
    result = _select(fused, partition, unit_costs(unit), config, unit_byte_lens(unit))
    return graphs, fused, result


def run_late_fusion(
    unit: TaskUnit,
    features: list[str],
    resources: FeatureResources,
    config: SelectionConfig,
    k_nn: int = 7,
) -> tuple[list[SimilarityGraph], SelectionResult]:
    """Borda-count fusion of the per-feature rankings under the unit budget."""
    partition = make_partition(unit, config)
    graphs = []
    rankings = []
    for f in features:
        graph, result = run_feature(unit, f, resources, config, k_nn, partition=partition)
        graphs.append(graph)
        rankings.append(result.ranking)
    fused = borda_fuse(rankings, unit_costs(unit), config, unit_byte_lens(unit))
    return graphs, fused


def resolve_partition_count(n: int, requested: int | None) -> int:
    return min(n, requested) if requested is not None else default_partition_count(n)
