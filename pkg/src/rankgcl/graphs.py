"""Undirected attributed graphs in CSR form, file loading, and synthetic
stochastic-block-model generation.

Graphs are immutable once built: every undirected edge is stored in both
directions, self-loops are stripped, and column indices are sorted within
each row. Message-passing code can then iterate neighbors in O(degree).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Graph", "SbmSpec", "GraphError", "build_graph", "load_graph",
           "generate_sbm", "validate", "symmetrize_edges"]


class GraphError(ValueError):
    """Malformed graph data or unparseable graph file."""


@dataclass(frozen=True)
class Graph:
    """CSR adjacency plus dense node features and optional labels."""

    num_nodes: int
    indptr: np.ndarray    # int64, length num_nodes + 1
    indices: np.ndarray   # int64, sorted within each row
    features: np.ndarray  # float64, num_nodes x feature_dim
    labels: np.ndarray | None = None  # int64 class ids

    def __post_init__(self):
        for arr in (self.indptr, self.indices, self.features, self.labels):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def num_directed_edges(self):
        return int(self.indices.shape[0])

    @property
    def num_undirected_edges(self):
        return self.num_directed_edges // 2

    @property
    def feature_dim(self):
        return int(self.features.shape[1])

    def neighbors(self, n):
        return self.indices[self.indptr[n]:self.indptr[n + 1]]

    def edge_pairs(self):
        """Undirected edges as an (m, 2) array of pairs with i < j."""
        src = np.repeat(np.arange(self.num_nodes), np.diff(self.indptr))
        dst = self.indices
        keep = src < dst
        return np.column_stack([src[keep], dst[keep]])

    def dense_adjacency(self):
        a = np.zeros((self.num_nodes, self.num_nodes))
        src = np.repeat(np.arange(self.num_nodes), np.diff(self.indptr))
        a[src, self.indices] = 1.0
        return a

    def with_features(self, features):
        return Graph(self.num_nodes, self.indptr, self.indices,
                     np.array(features, dtype=np.float64), self.labels)


@dataclass(frozen=True)
class SbmSpec:
    """Planted-partition generator settings.

    Block feature means sit at ``mean_separation`` along one axis per
    block, so classes are linearly separable in expectation when the
    separation is large against unit feature noise.
    """

    block_sizes: tuple
    p_in: float
    p_out: float
    feature_dim: int
    mean_separation: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "block_sizes", tuple(int(b) for b in self.block_sizes))
        if not self.block_sizes or any(b <= 0 for b in self.block_sizes):
            raise GraphError(f"block_sizes must be nonempty and positive: {self.block_sizes}")
        for name, p in (("p_in", self.p_in), ("p_out", self.p_out)):
            if not 0.0 <= p <= 1.0:
                raise GraphError(f"{name} must be in [0, 1], got {p}")
        if self.feature_dim < len(self.block_sizes):
            raise GraphError(
                f"feature_dim {self.feature_dim} smaller than number of "
                f"blocks {len(self.block_sizes)}"
            )
        if self.mean_separation < 0:
            raise GraphError(f"mean_separation must be >= 0, got {self.mean_separation}")


def symmetrize_edges(num_nodes, edges):
    """Normalize an edge list: drop self-loops, add reverse directions,
    deduplicate. Returns CSR (indptr, indices). Idempotent."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size:
        if edges.min() < 0 or edges.max() >= num_nodes:
            raise GraphError(
                f"edge endpoint out of range [0, {num_nodes}): "
                f"min {edges.min()}, max {edges.max()}"
            )
        edges = edges[edges[:, 0] != edges[:, 1]]
    both = np.concatenate([edges, edges[:, ::-1]]) if edges.size else edges
    if both.size:
        both = np.unique(both, axis=0)  # sorts lexicographically: row, then col
    src = both[:, 0] if both.size else np.empty(0, dtype=np.int64)
    dst = both[:, 1] if both.size else np.empty(0, dtype=np.int64)
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    indptr = np.cumsum(indptr)
    return indptr.astype(np.int64), dst.astype(np.int64)


def build_graph(num_nodes, edges, features, labels=None):
    """Construct a validated Graph from a raw (possibly messy) edge list."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != num_nodes:
        raise GraphError(
            f"features must be ({num_nodes}, d), got {features.shape}"
        )
    if labels is not None:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (num_nodes,):
            raise GraphError(f"labels must have length {num_nodes}, got {labels.shape}")
        if labels.size and labels.min() < 0:
            raise GraphError("labels must be nonnegative class indices")
    indptr, indices = symmetrize_edges(num_nodes, edges)
    g = Graph(num_nodes, indptr, indices, features, labels)
    problem = validate(g)
    if problem is not None:
        raise GraphError(problem)
    return g


def validate(g):
    """Check all Graph invariants; return None or a description of the
    first violation found."""
    if g.indptr.shape != (g.num_nodes + 1,):
        return f"indptr length {g.indptr.shape[0]} != num_nodes + 1"
    if g.indptr[0] != 0:
        return "indptr must start at 0"
    if np.any(np.diff(g.indptr) < 0):
        return "indptr offsets must be non-decreasing"
    if g.indptr[-1] != g.indices.shape[0]:
        return (f"last offset {g.indptr[-1]} != directed edge count "
                f"{g.indices.shape[0]}")
    if g.indices.size and (g.indices.min() < 0 or g.indices.max() >= g.num_nodes):
        return "column index out of range"
    for n in range(g.num_nodes):
        row = g.indices[g.indptr[n]:g.indptr[n + 1]]
        if row.size and np.any(np.diff(row) <= 0):
            return f"row {n}: column indices not strictly increasing"
        if np.any(row == n):
            return f"row {n}: self-loop stored in base graph"
    # symmetry via sorted directed pair sets
    src = np.repeat(np.arange(g.num_nodes), np.diff(g.indptr))
    fwd = np.column_stack([src, g.indices])
    rev = np.column_stack([g.indices, src])
    if fwd.size and not np.array_equal(
        fwd[np.lexsort((fwd[:, 1], fwd[:, 0]))],
        rev[np.lexsort((rev[:, 1], rev[:, 0]))],
    ):
        return "adjacency is not symmetric"
    if g.features.shape[0] != g.num_nodes:
        return f"feature rows {g.features.shape[0]} != num_nodes {g.num_nodes}"
    if g.labels is not None and g.labels.shape != (g.num_nodes,):
        return "label count != num_nodes"
    return None


def _parse_error(path, line_no, message):
    return GraphError(f"{path}:{line_no}: {message}")


def load_graph(edge_path, feature_path, label_path=None):
    """Load a graph from text files.

    Edge file: one edge per line, two whitespace-separated 0-based node
    indices, '#' lines ignored. Feature file: CSV, row i holds node i's
    features. Label file: one integer per line. Node count comes from the
    feature file.
    """
    features = []
    width = None
    with open(feature_path) as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = [float(v) for v in line.split(",")]
            except ValueError as e:
                raise _parse_error(feature_path, line_no, f"bad feature value: {e}") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise _parse_error(
                    feature_path, line_no,
                    f"feature row has {len(row)} values, expected {width}")
            features.append(row)
    if not features:
        raise GraphError(f"{feature_path}: no feature rows")
    features = np.asarray(features, dtype=np.float64)
    num_nodes = features.shape[0]

    edges = []
    with open(edge_path) as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise _parse_error(edge_path, line_no,
                                   f"expected two node indices, got {len(parts)} fields")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise _parse_error(edge_path, line_no, f"bad node index: {line!r}") from None
            if not (0 <= u < num_nodes and 0 <= v < num_nodes):
                raise _parse_error(edge_path, line_no,
                                   f"node index out of range [0, {num_nodes})")
            edges.append((u, v))

    labels = None
    if label_path is not None:
        labels = []
        with open(label_path) as f:
            for line_no, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    labels.append(int(line))
                except ValueError:
                    raise _parse_error(label_path, line_no, f"bad label: {line!r}") from None
        if len(labels) != num_nodes:
            raise GraphError(
                f"{label_path}: {len(labels)} labels for {num_nodes} nodes")
        labels = np.asarray(labels, dtype=np.int64)

    return build_graph(num_nodes, np.asarray(edges, dtype=np.int64).reshape(-1, 2),
                       features, labels)


def generate_sbm(spec):
    """Sample a planted-partition graph; deterministic for a fixed seed.

    Every intra-block unordered pair is an edge with probability p_in,
    every inter-block pair with p_out. Features are unit-variance
    Gaussians around block-specific means and labels are block indices.
    """
    rng = np.random.default_rng(spec.seed)
    n = int(sum(spec.block_sizes))
    labels = np.repeat(np.arange(len(spec.block_sizes)), spec.block_sizes)

    prob = np.where(labels[:, None] == labels[None, :], spec.p_in, spec.p_out)
    draw = rng.random((n, n))
    upper = np.triu(draw < prob, k=1)
    src, dst = np.nonzero(upper)
    edges = np.column_stack([src, dst])

    means = np.zeros((len(spec.block_sizes), spec.feature_dim))
    for b in range(len(spec.block_sizes)):
        means[b, b] = spec.mean_separation
    features = rng.standard_normal((n, spec.feature_dim)) + means[labels]

    return build_graph(n, edges, features, labels)
