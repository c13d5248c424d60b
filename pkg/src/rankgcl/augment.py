"""Ordered lists of perturbed graph views.

A view list applies one augmentation kind at strictly increasing
strengths; the paired judgment scores decrease with strength, so the
least-perturbed view carries the highest judgment. Fresh random draws are
taken every call, one independent draw per view.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, symmetrize_edges

__all__ = ["ViewSpec", "drop_edge", "feature_mask", "make_views",
           "validate_view_specs", "KINDS"]

KINDS = ("drop_edge", "feature_mask")


@dataclass(frozen=True)
class ViewSpec:
    """One augmentation recipe.

    ``strength`` is the drop ratio (fraction of undirected edges removed)
    for ``drop_edge``, or the masking probability for ``feature_mask``.
    ``judgment`` is the positive ground-truth relevance score assigned to
    this view's positive pairs.
    """

    kind: str
    strength: float
    judgment: float
    order_index: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown view kind {self.kind!r}, expected one of {KINDS}")
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"view strength must be in [0, 1], got {self.strength}")
        if not self.judgment > 0.0:
            raise ValueError(f"view judgment must be > 0, got {self.judgment}")


def validate_view_specs(specs, allow_equal_judgments=False):
    """Reject view lists whose strengths/judgments are out of order.

    Strengths must strictly increase and judgments must decrease with the
    view index. ``allow_equal_judgments`` relaxes the judgment ordering to
    non-increasing (ties allowed) for ablation configurations that rank
    all views equally.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("view list is empty")
    kinds = {s.kind for s in specs}
    if len(kinds) != 1:
        raise ValueError(f"view kinds must be homogeneous within one list, got {sorted(kinds)}")
    for prev, cur in zip(specs, specs[1:]):
        if not cur.strength > prev.strength:
            raise ValueError(
                f"view strengths must strictly increase: "
                f"{prev.strength} before {cur.strength}"
            )
        if cur.judgment > prev.judgment or (
            not allow_equal_judgments and cur.judgment == prev.judgment
        ):
            raise ValueError(
                f"view judgments must decrease with strength: "
                f"{prev.judgment} before {cur.judgment}"
            )
    return specs


def drop_edge(g, drop_ratio, rng):
    """Remove each undirected edge independently with probability
    ``drop_ratio``; features and labels are untouched."""
    if not 0.0 <= drop_ratio <= 1.0:
        raise ValueError(f"drop_ratio must be in [0, 1], got {drop_ratio}")
    pairs = g.edge_pairs()
    keep = rng.random(pairs.shape[0]) >= drop_ratio
    indptr, indices = symmetrize_edges(g.num_nodes, pairs[keep])
    return Graph(g.num_nodes, indptr, indices, g.features, g.labels)


def feature_mask(g, mask_prob, rng):
    """Zero whole feature columns: one Bernoulli(1 - mask_prob) keep draw
    per dimension, applied to every node; edges are untouched."""
    if not 0.0 <= mask_prob <= 1.0:
        raise ValueError(f"mask_prob must be in [0, 1], got {mask_prob}")
    keep = rng.random(g.feature_dim) >= mask_prob
    return g.with_features(g.features * keep[None, :])


def make_views(g, specs, rng, allow_equal_judgments=False):
    """Apply each spec to the input graph with an independent draw,
    returning views in spec order."""
    specs = validate_view_specs(specs, allow_equal_judgments=allow_equal_judgments)
    views = []
    for spec in specs:
        if spec.kind == "drop_edge":
            views.append(drop_edge(g, spec.strength, rng))
        else:
            views.append(feature_mask(g, spec.strength, rng))
    return views
