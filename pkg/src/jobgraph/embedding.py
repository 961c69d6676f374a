"""Estimator-style wrappers composing walks and skip-gram training.

Node2VecEmbedder and MetapathEmbedder follow the familiar fit/transform
contract: fit(graph) generates walks and trains the embedding, transform maps
nodes (or a whole graph) to their vectors. Hyperparameters are plain
constructor arguments so get_params/set_params and clone() work unchanged.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import ConfigError
from .graphs import HeteroGraph, NodeKind, NodeRef
from .sgns import EmbeddingMatrix, TrainConfig, train_embeddings
from .walks import WalkConfig, WalkCorpus, metapath_walks, node2vec_walks


class _WalkEmbedderBase(BaseEstimator, TransformerMixin):
    def _make_walks(self, graph: HeteroGraph) -> WalkCorpus:
        raise NotImplementedError

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            dim=self.dim,
            window=self.window,
            negatives=self.negatives,
            epochs=self.epochs,
            initial_step_size=self.initial_step_size,
            seed=self.seed,
            deterministic=self.deterministic,
        )

    def fit(self, graph: HeteroGraph, y: object = None) -> "_WalkEmbedderBase":
        if not isinstance(graph, HeteroGraph):
            raise ConfigError(f"fit expects a HeteroGraph, got {type(graph).__name__}")
        walks = self._make_walks(graph)
        self.embedding_ = train_embeddings(walks, self._train_config(), nodes=graph.nodes)
        return self

    def transform(self, X: HeteroGraph | Iterable[NodeRef]) -> np.ndarray:
        if not hasattr(self, "embedding_"):
            raise NotFittedError("embedder is not fitted; call fit first")
        nodes = X.nodes if isinstance(X, HeteroGraph) else list(X)
        return self.embedding_.rows(nodes)

    @property
    def matrix_(self) -> EmbeddingMatrix:
        if not hasattr(self, "embedding_"):
            raise NotFittedError("embedder is not fitted; call fit first")
        return self.embedding_


class Node2VecEmbedder(_WalkEmbedderBase):
    """Second-order biased walks feeding skip-gram negative sampling."""

    def __init__(
        self,
        dim: int = 128,
        walk_length: int = 10,
        walks_per_node: int = 50,
        p: float = 1.0,
        q: float = 1.0,
        respect_direction: bool = False,
        window: int = 5,
        negatives: int = 5,
        epochs: int = 5,
        initial_step_size: float = 0.025,
        seed: int = 0,
        deterministic: bool = True,
    ) -> None:
        self.dim = dim
        self.walk_length = walk_length
        self.walks_per_node = walks_per_node
        self.p = p
        self.q = q
        self.respect_direction = respect_direction
        self.window = window
        self.negatives = negatives
        self.epochs = epochs
        self.initial_step_size = initial_step_size
        self.seed = seed
        self.deterministic = deterministic

    def _make_walks(self, graph: HeteroGraph) -> WalkCorpus:
        cfg = WalkConfig(
            walk_length=self.walk_length,
            walks_per_node=self.walks_per_node,
            p=self.p,
            q=self.q,
            respect_direction=self.respect_direction,
            seed=self.seed,
        )
        return node2vec_walks(graph, cfg)


class MetapathEmbedder(_WalkEmbedderBase):
    """Metapath-guided uniform walks feeding skip-gram negative sampling."""

    def __init__(
        self,
        metapath: Sequence[str] = ("job", "tag", "job"),
        dim: int = 128,
        walk_length: int = 10,
        walks_per_node: int = 50,
        respect_direction: bool = False,
        window: int = 5,
        negatives: int = 5,
        epochs: int = 5,
        initial_step_size: float = 0.025,
        seed: int = 0,
        deterministic: bool = True,
    ) -> None:
        self.metapath = metapath
        self.dim = dim
        self.walk_length = walk_length
        self.walks_per_node = walks_per_node
        self.respect_direction = respect_direction
        self.window = window
        self.negatives = negatives
        self.epochs = epochs
        self.initial_step_size = initial_step_size
        self.seed = seed
        self.deterministic = deterministic

    def _make_walks(self, graph: HeteroGraph) -> WalkCorpus:
        try:
            pattern = tuple(NodeKind(k) for k in self.metapath)
        except ValueError:
            raise ConfigError(f"unknown node kind in metapath {tuple(self.metapath)!r}") from None
        cfg = WalkConfig(
            walk_length=self.walk_length,
            walks_per_node=self.walks_per_node,
            respect_direction=self.respect_direction,
            metapath=pattern,
            seed=self.seed,
        )
        return metapath_walks(graph, cfg)
