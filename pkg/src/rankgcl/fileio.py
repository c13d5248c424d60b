"""On-disk formats: graph text files and the binary embedding container.

Graph files are plain text (edge list, feature CSV, one label per line,
0-based indices throughout). Embeddings are a little-endian binary block:
magic "C2FE", format version (u32), row and column counts (u64), then
row-major f64 values.
"""

from __future__ import annotations

import struct

import numpy as np

__all__ = ["save_embeddings", "load_embeddings", "write_graph_files"]

EMBEDDING_MAGIC = b"C2FE"
EMBEDDING_VERSION = 1


def save_embeddings(path, z):
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise ValueError(f"embeddings must be 2-D, got shape {z.shape}")
    with open(path, "wb") as f:
        f.write(EMBEDDING_MAGIC)
        f.write(struct.pack("<I", EMBEDDING_VERSION))
        f.write(struct.pack("<Q", z.shape[0]))
        f.write(struct.pack("<Q", z.shape[1]))
        f.write(np.ascontiguousarray(z, dtype="<f8").tobytes())


def load_embeddings(path):
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != EMBEDDING_MAGIC:
            raise ValueError(f"{path}: bad embedding magic {magic!r}")
        (version,) = struct.unpack("<I", f.read(4))
        if version != EMBEDDING_VERSION:
            raise ValueError(f"{path}: unsupported embedding version {version}")
        rows, cols = struct.unpack("<QQ", f.read(16))
        data = np.frombuffer(f.read(8 * rows * cols), dtype="<f8")
        if data.size != rows * cols:
            raise ValueError(f"{path}: truncated embedding file")
        return np.array(data, dtype=np.float64).reshape(rows, cols)


def write_graph_files(graph, edge_path, feature_path, label_path=None):
    """Write a graph back out in the loadable text formats; each
    undirected edge appears once in the edge file."""
    with open(edge_path, "w") as f:
        f.write("# one undirected edge per line: u v\n")
        for u, v in graph.edge_pairs():
            f.write(f"{u} {v}\n")
    with open(feature_path, "w") as f:
        for row in graph.features:
            f.write(",".join(repr(float(x)) for x in row) + "\n")
    if label_path is not None:
        if graph.labels is None:
            raise ValueError("graph has no labels to write")
        with open(label_path, "w") as f:
            for y in graph.labels:
                f.write(f"{int(y)}\n")
