"""Question networks: what each prediction node is about.

A node's *parent* is the quantity it predicts one step ahead: either a
feature function of the next observation (``FeatureObs``) or another
node's next value (``NodePred``).  Chaining nodes therefore stacks
horizons: a node at depth ``k`` is, transitively, a ``k``-step-ahead
prediction of its chain's feature function.

Controlled networks additionally condition every link of a chain on one
action activation function; all links of a chain share the same
condition index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .validation import check_index, check_positive_int


@dataclass(frozen=True)
class FeatureObs:
    """A target drawn from the observation: feature function ``index``."""

    index: int


@dataclass(frozen=True)
class NodePred:
    """A target drawn from the state: prediction node ``index``."""

    index: int


Target = Union[FeatureObs, NodePred]


@dataclass(frozen=True)
class QuestionNode:
    parent: Target
    condition: int | None
    depth: int


@dataclass(frozen=True, eq=False)
class QuestionNetwork:
    """A forest of prediction chains rooted at observation features."""

    nodes: tuple[QuestionNode, ...]
    feature_count: int
    activation_count: int
    chain_depth: int

    def __post_init__(self) -> None:
        for i, node in enumerate(self.nodes):
            if isinstance(node.parent, FeatureObs):
                check_index(node.parent.index, self.feature_count, f"node {i} feature target")
            else:
                check_index(node.parent.index, len(self.nodes), f"node {i} node target")
            if node.condition is not None:
                check_index(node.condition, self.activation_count, f"node {i} condition")
            if node.depth < 1:
                raise ValueError(f"node {i} depth must be >= 1, got {node.depth}")

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def controlled(self) -> bool:
        return self.activation_count > 0

    def depth(self, node: int) -> int:
        return self.nodes[check_index(node, len(self.nodes), "node")].depth

    def kth_parent(self, node: int, k: int) -> Target:
        """The k-th iterate of the parent function; k=0 is the node itself.

        Walking past the chain's observation feature (k > depth) is a
        bookkeeping bug in the caller and raises.
        """
        check_index(node, len(self.nodes), "node")
        if k < 0:
            raise ValueError(f"k must be non-negative, got {k}")
        target: Target = NodePred(node)
        for _ in range(k):
            if isinstance(target, FeatureObs):
                raise ValueError(f"node {node} has no parent of order {k} (chain depth exceeded)")
            target = self.nodes[target.index].parent
        return target

    def children_of_feature(self, feature: int) -> list[tuple[int, int | None]]:
        """Depth-1 nodes targeting ``feature``, with their condition indices."""
        check_index(feature, self.feature_count, "feature")
        return [
            (i, node.condition)
            for i, node in enumerate(self.nodes)
            if isinstance(node.parent, FeatureObs) and node.parent.index == feature
        ]

    def validate(self) -> None:
        """Check the full chain-forest invariants (tests and debugging)."""
        for i, node in enumerate(self.nodes):
            target = self.kth_parent(i, node.depth)
            if not isinstance(target, FeatureObs):
                raise AssertionError(f"node {i}: {node.depth} parent steps do not reach a feature")
            if isinstance(node.parent, NodePred):
                parent = self.nodes[node.parent.index]
                if parent.depth != node.depth - 1:
                    raise AssertionError(f"node {i}: parent depth {parent.depth} != {node.depth - 1}")
                if parent.condition != node.condition:
                    raise AssertionError(f"node {i}: condition differs from parent's")

    def dump(self) -> str:
        """Plain-text listing, one line per node: id, parent, condition, depth."""
        lines = []
        for i, node in enumerate(self.nodes):
            if isinstance(node.parent, FeatureObs):
                parent = f"obs[{node.parent.index}]"
            else:
                parent = f"node[{node.parent.index}]"
            cond = "-" if node.condition is None else str(node.condition)
            lines.append(f"{i}\t{parent}\t{cond}\t{node.depth}")
        return "\n".join(lines)


def build_chain_network(
    feature_count: int, activation_count: int, chain_depth: int
) -> QuestionNetwork:
    """Build the chain-per-(feature, activation) network used throughout.

    For every feature ``f`` and every activation ``j`` there is one chain
    of ``chain_depth`` nodes: the first targets ``FeatureObs(f)``, each
    later node targets its predecessor, and every link carries condition
    ``j``.  ``activation_count=0`` builds the uncontrolled variant with a
    single unconditioned chain per feature.

    Node ids are dense and assigned feature-major, then activation, then
    depth, so weight-matrix rows are addressable and reproducible.
    """
    check_positive_int(feature_count, "feature_count")
    check_positive_int(chain_depth, "chain_depth")
    if activation_count < 0:
        raise ValueError(f"activation_count must be >= 0, got {activation_count}")

    conditions: list[int | None] = list(range(activation_count)) if activation_count else [None]
    nodes: list[QuestionNode] = []
    for f in range(feature_count):
        for cond in conditions:
            for depth in range(1, chain_depth + 1):
                parent: Target = FeatureObs(f) if depth == 1 else NodePred(len(nodes) - 1)
                nodes.append(QuestionNode(parent=parent, condition=cond, depth=depth))
    return QuestionNetwork(
        nodes=tuple(nodes),
        feature_count=feature_count,
        activation_count=activation_count,
        chain_depth=chain_depth,
    )


def feature_child_matrix(net: QuestionNetwork) -> np.ndarray:
    """Node ids of the depth-1 children, arranged for vectorized lookup.

    Controlled networks yield shape ``(feature_count, activation_count)``
    with entry ``[f, j]`` the child of feature ``f`` conditioned on
    activation ``j``; uncontrolled networks yield ``(feature_count, 1)``.
    Raises if any (feature, condition) slot is missing or duplicated.
    """
    width = net.activation_count if net.controlled else 1
    out = np.full((net.feature_count, width), -1, dtype=np.int64)
    for f in range(net.feature_count):
        for node, cond in net.children_of_feature(f):
            j = 0 if cond is None else cond
            if out[f, j] != -1:
                raise ValueError(f"feature {f} has duplicate children for condition {cond}")
            out[f, j] = node
    if np.any(out < 0):
        raise ValueError("every (feature, condition) pair needs exactly one depth-1 child")
    return out
