"""Graph encoders mapping (adjacency, features) to node embeddings.

The main backbone is a graph attention network: per head, attention
logits e_ij = LeakyReLU(a_src . W h_i + a_dst . W h_j) are computed over
each node's neighborhood plus a self-loop, normalized with a masked
softmax, and used to average the projected neighbor features. Hidden
layers concatenate heads and apply ELU; the final layer averages heads
and stays linear. A degree-normalized GCN is available as a cheap
alternative backbone.

Attention works on dense N x N score matrices masked to the edge set,
which is the intended operating point for desk-scale graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor

__all__ = ["GatLayerParams", "GatParams", "GcnParams", "init_gat_params",
           "init_gcn_params", "gat_layer", "gcn_layer", "encode"]

LEAKY_SLOPE = 0.2


@dataclass
class GatLayerParams:
    """One attention layer: a shared projection and per-head score vectors."""

    w: Tensor              # d_in x (heads * units)
    a_src: list            # per head, units x 1
    a_dst: list            # per head, units x 1
    units: int
    concat: bool           # concat heads (hidden) vs average (final)

    @property
    def heads(self):
        return len(self.a_src)

    def parameters(self):
        return [self.w, *self.a_src, *self.a_dst]


@dataclass
class GatParams:
    layers: list

    def parameters(self):
        return [p for layer in self.layers for p in layer.parameters()]


@dataclass
class GcnParams:
    weights: list

    def parameters(self):
        return list(self.weights)


def _glorot(rng, rows, cols):
    s = np.sqrt(6.0 / (rows + cols))
    return ad.parameter(rng.uniform(-s, s, size=(rows, cols)))


def init_gat_params(feature_dim, rng, num_layers=2, heads=8, hidden_units=8,
                    out_dim=64):
    """Uniform Glorot init. Hidden layers concatenate ``heads * hidden_units``
    features; the final layer has ``out_dim`` units per head, averaged."""
    if num_layers < 1:
        raise ValueError("num_layers must be >= 1")
    layers = []
    d_in = feature_dim
    for layer_idx in range(num_layers):
        final = layer_idx == num_layers - 1
        units = out_dim if final else hidden_units
        w = _glorot(rng, d_in, heads * units)
        a_src = [_glorot(rng, units, 1) for _ in range(heads)]
        a_dst = [_glorot(rng, units, 1) for _ in range(heads)]
        layers.append(GatLayerParams(w, a_src, a_dst, units, concat=not final))
        d_in = heads * units if not final else units
    return GatParams(layers)


def init_gcn_params(feature_dim, rng, num_layers=2, hidden_dim=64, out_dim=64):
    layers = []
    d_in = feature_dim
    for layer_idx in range(num_layers):
        d_out = out_dim if layer_idx == num_layers - 1 else hidden_dim
        layers.append(_glorot(rng, d_in, d_out))
        d_in = d_out
    return GcnParams(layers)


def attention_mask(g):
    """Dense mask: 0 on stored edges and the diagonal, -inf elsewhere."""
    mask = np.full((g.num_nodes, g.num_nodes), -np.inf)
    src = np.repeat(np.arange(g.num_nodes), np.diff(g.indptr))
    mask[src, g.indices] = 0.0
    np.fill_diagonal(mask, 0.0)
    return mask


def gat_layer(h_in, g, layer, activation=None, slope=LEAKY_SLOPE,
              dropout=0.0, rng=None, return_attention=False):
    """One multi-head attention layer over the graph's masked neighborhood.

    ``activation`` is applied to the combined head output; pass None for a
    linear layer. With ``dropout`` > 0 and an rng, attention coefficients
    are dropped (inverted scaling), as in the original architecture.
    """
    n = g.num_nodes
    if h_in.data.shape[0] != n:
        raise ValueError(f"encoder input has {h_in.data.shape[0]} rows for {n} nodes")
    mask = ad.tensor(attention_mask(g))
    projected = ad.matmul(h_in, layer.w)

    head_outs = []
    attentions = []
    for h in range(layer.heads):
        wh = ad.slice_cols(projected, h * layer.units, (h + 1) * layer.units)
        src = ad.matmul(wh, layer.a_src[h])   # n x 1
        dst = ad.matmul(wh, layer.a_dst[h])   # n x 1
        logits = ad.outer_sum(src, ad.transpose(dst))
        logits = ad.add(ad.leaky_relu(logits, slope), mask)
        att = ad.row_softmax(logits)
        if dropout > 0.0 and rng is not None:
            keep = (rng.random((n, n)) >= dropout) / (1.0 - dropout)
            att = ad.hadamard(att, ad.tensor(keep))
        if return_attention:
            attentions.append(att)
        head_outs.append(ad.matmul(att, wh))

    if layer.concat:
        out = ad.concat_cols(head_outs)
    else:
        out = head_outs[0]
        for extra in head_outs[1:]:
            out = ad.add(out, extra)
        out = ad.scale(out, 1.0 / layer.heads)
    if activation is not None:
        out = activation(out)
    return (out, attentions) if return_attention else out


def gcn_normalization(g):
    """Dense D^-1/2 (A + I) D^-1/2 propagation matrix."""
    a = g.dense_adjacency() + np.eye(g.num_nodes)
    d = a.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(d)
    return a * inv_sqrt[:, None] * inv_sqrt[None, :]


def gcn_layer(h_in, g, w, activation=None):
    out = ad.matmul(ad.tensor(gcn_normalization(g)), ad.matmul(h_in, w))
    if activation is not None:
        out = activation(out)
    return out


def encode(g, params, dropout=0.0, rng=None):
    """Stack the encoder's layers over the graph: ELU between layers,
    linear output. Returns the N x d2 embedding tensor."""
    h = ad.tensor(g.features)
    if isinstance(params, GatParams):
        layers = params.layers
        for i, layer in enumerate(layers):
            act = None if i == len(layers) - 1 else ad.elu
            h = gat_layer(h, g, layer, activation=act, dropout=dropout, rng=rng)
        return h
    if isinstance(params, GcnParams):
        for i, w in enumerate(params.weights):
            act = None if i == len(params.weights) - 1 else ad.elu
            h = gcn_layer(h, g, w, activation=act)
        return h
    raise TypeError(f"unknown encoder parameters: {type(params).__name__}")
