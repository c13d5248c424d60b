"""Full-batch self-supervised pre-training loop.

Each iteration encodes the clean graph, draws fresh augmented views,
encodes them, refreshes the negative bank with the iteration's detached
clean embeddings, samples per-node negatives, and takes one Adam step on
the ranked contrastive loss. Runs are bitwise deterministic for a fixed
seed: a single generator owns every random draw in a fixed order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .augment import ViewSpec, make_views, validate_view_specs
from .encoders import GatParams, GcnParams, encode, init_gat_params, init_gcn_params
from .losses import SimilarityConfig, c2f_loss

__all__ = ["TrainConfig", "NegativeBank", "Adam", "ABLATION_MODES",
           "sample_negative_indices", "sample_negatives", "default_config",
           "config_from_dict", "config_to_dict", "TrainState", "init_state",
           "train_step", "pretrain", "PretrainResult",
           "save_checkpoint", "load_checkpoint", "set_parameters"]

ABLATION_MODES = ("vanilla", "coarse", "fine", "c2f")

CHECKPOINT_MAGIC = b"C2FP"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """All run hyperparameters; defaults follow the reference recipe
    (two edge-drop views at ratios 0.5/0.8 with judgments 1.0/0.7,
    alpha 0.8, temperature 0.1)."""

    views: tuple = (
        ViewSpec("drop_edge", 0.5, 1.0, 0),
        ViewSpec("drop_edge", 0.8, 0.7, 1),
    )
    alpha: float = 0.8
    num_negatives: int = 64
    temperature: float = 0.1
    learning_rate: float = 1e-3
    iterations: int = 300
    seed: int = 0
    encoder: str = "gat"
    num_layers: int = 2
    heads: int = 8
    hidden_units: int = 8
    out_dim: int = 64
    ablation_mode: str = "c2f"
    normalize_embeddings: bool = False
    dropout: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "views", tuple(self.views))
        if self.num_negatives < 1:
            raise ValueError("num_negatives must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.ablation_mode not in ABLATION_MODES:
            raise ValueError(
                f"ablation_mode must be one of {ABLATION_MODES}, got {self.ablation_mode!r}")
        if self.encoder not in ("gat", "gcn"):
            raise ValueError(f"encoder must be 'gat' or 'gcn', got {self.encoder!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        validate_view_specs(self.views, allow_equal_judgments=self.allows_equal_judgments)
        judgments = self.judgments
        equal = np.all(judgments == judgments[0])
        if self.ablation_mode == "vanilla":
            if self.alpha != 1.0 or not equal:
                raise ValueError("vanilla mode requires alpha=1 and all judgments equal")
        elif self.ablation_mode == "coarse":
            if self.alpha != 1.0:
                raise ValueError("coarse mode requires alpha=1")
        elif self.ablation_mode == "fine":
            if not equal:
                raise ValueError("fine mode requires all judgments equal")

    @property
    def allows_equal_judgments(self):
        return self.ablation_mode in ("vanilla", "fine")

    @property
    def judgments(self):
        return np.array([v.judgment for v in self.views])

    @property
    def similarity(self):
        return SimilarityConfig(self.temperature, self.normalize_embeddings)


def default_config(num_nodes, **overrides):
    """Reference hyperparameters with the negative-sample count clamped
    to the graph size (at most N - 1, at most 1024).

    Embedding normalization is on here: with raw dot-product scores the
    norm race at small N sends the loss value through the roof even while
    the geometry organizes, so the desk-scale default keeps similarities
    bounded. Disable it to reproduce the raw large-scale recipe.
    """
    k = min(1024, num_nodes - 1)
    cfg = TrainConfig(num_negatives=k, normalize_embeddings=True)
    return replace(cfg, **overrides) if overrides else cfg


_CONFIG_FIELDS = ("views", "alpha", "num_negatives", "temperature",
                  "learning_rate", "iterations", "seed", "encoder",
                  "num_layers", "heads", "hidden_units", "out_dim",
                  "ablation_mode", "normalize_embeddings", "dropout")


def config_from_dict(raw):
    """Build a TrainConfig from parsed JSON; unknown keys are errors."""
    if not isinstance(raw, dict):
        raise ValueError("config must be a JSON object")
    unknown = set(raw) - set(_CONFIG_FIELDS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(raw)
    if "views" in kwargs:
        views = []
        for i, entry in enumerate(kwargs["views"]):
            extra = set(entry) - {"kind", "strength", "judgment", "order_index"}
            if extra:
                raise ValueError(f"unknown view keys: {sorted(extra)}")
            order = entry.get("order_index", i)
            if order != i:
                raise ValueError(f"view {i} has order_index {order}")
            views.append(ViewSpec(entry["kind"], float(entry["strength"]),
                                  float(entry["judgment"]), i))
        kwargs["views"] = tuple(views)
    return TrainConfig(**kwargs)


def config_to_dict(cfg):
    out = {}
    for name in _CONFIG_FIELDS:
        value = getattr(cfg, name)
        if name == "views":
            value = [
                {"kind": v.kind, "strength": v.strength,
                 "judgment": v.judgment, "order_index": v.order_index}
                for v in value
            ]
        out[name] = value
    return out


@dataclass
class NegativeBank:
    """Detached embedding store plus this iteration's per-node draws."""

    embeddings: np.ndarray   # N x d, no gradient participation
    indices: np.ndarray      # N x K, row n excludes n

    @classmethod
    def draw(cls, embeddings, num_negatives, rng):
        n = embeddings.shape[0]
        indices = np.empty((n, num_negatives), dtype=np.int64)
        for node in range(n):
            indices[node] = sample_negative_indices(n, node, num_negatives, rng)
        return cls(np.array(embeddings, copy=True), indices)


def sample_negative_indices(num_rows, node, k, rng):
    """K indices drawn uniformly without replacement from all rows except
    ``node``."""
    if k >= num_rows:
        raise ValueError(f"cannot draw {k} negatives from {num_rows} rows excluding self")
    idx = rng.choice(num_rows - 1, size=k, replace=False)
    return np.where(idx >= node, idx + 1, idx)


def sample_negatives(bank, node, k, rng):
    """Fresh negative embeddings for one node: detached bank rows."""
    return bank.embeddings[sample_negative_indices(bank.embeddings.shape[0], node, k, rng)]


class Adam:
    """Standard Adam with bias correction; beta1=0.9, beta2=0.999, eps=1e-8."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        self.step_count += 1
        b1, b2 = self.beta1, self.beta2
        for i, p in enumerate(self.params):
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * g
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * g * g
            m_hat = self.m[i] / (1.0 - b1 ** self.step_count)
            v_hat = self.v[i] / (1.0 - b2 ** self.step_count)
            p.data = p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class TrainState:
    graph: object
    config: TrainConfig
    params: object
    optimizer: Adam
    rng: np.random.Generator
    iteration: int = 0
    last_bank: NegativeBank | None = None


def _init_params(graph, config, rng):
    if config.encoder == "gat":
        return init_gat_params(graph.feature_dim, rng, config.num_layers,
                               config.heads, config.hidden_units, config.out_dim)
    return init_gcn_params(graph.feature_dim, rng, config.num_layers,
                           config.heads * config.hidden_units, config.out_dim)


def init_state(graph, config):
    if config.num_negatives >= graph.num_nodes:
        raise ValueError(
            f"num_negatives {config.num_negatives} must be < num_nodes {graph.num_nodes}")
    rng = np.random.default_rng(config.seed)
    params = _init_params(graph, config, rng)
    optimizer = Adam(params.parameters(), config.learning_rate)
    return TrainState(graph, config, params, optimizer, rng)


def train_step(state):
    """One full pass: encode, augment, refresh bank, rank, update.
    Returns the iteration's loss."""
    cfg = state.config
    g = state.graph
    rng = state.rng

    z = encode(g, state.params, dropout=cfg.dropout, rng=rng if cfg.dropout > 0 else None)
    views = make_views(g, cfg.views, rng, allow_equal_judgments=cfg.allows_equal_judgments)
    view_embeddings = [
        encode(v, state.params, dropout=cfg.dropout, rng=rng if cfg.dropout > 0 else None)
        for v in views
    ]
    bank = NegativeBank.draw(z.data, cfg.num_negatives, rng)
    state.last_bank = bank

    loss = c2f_loss(z, view_embeddings, bank.embeddings, bank.indices,
                    cfg.judgments, cfg.alpha, cfg.similarity)
    loss_value = loss.item()
    if not np.isfinite(loss_value):
        norms = [float(np.linalg.norm(p.grad)) if p.grad is not None else 0.0
                 for p in state.params.parameters()]
        raise RuntimeError(
            f"non-finite loss {loss_value} at iteration {state.iteration}; "
            f"last gradient norms {norms}")

    ad.zero_grads(state.params.parameters())
    ad.backward(loss)
    state.optimizer.step()
    state.iteration += 1
    return loss_value


@dataclass
class PretrainResult:
    params: object
    embeddings: np.ndarray   # detached, from the clean graph
    loss_history: list = field(default_factory=list)


def pretrain(graph, config):
    """Run the full pre-training loop and return the trained encoder,
    final clean-graph embeddings, and the loss trajectory."""
    state = init_state(graph, config)
    history = []
    for _ in range(config.iterations):
        history.append(train_step(state))
    final = encode(graph, state.params)
    return PretrainResult(state.params, np.array(final.data, copy=True), history)


def save_checkpoint(path, params):
    """Binary little-endian parameter dump: magic, format version (u32),
    parameter count (u64), then per parameter rank (u32), dims (u64 each),
    and row-major f64 values. Parameter order is the canonical
    ``parameters()`` order of the encoder."""
    arrays = [p.data for p in params.parameters()]
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<I", CHECKPOINT_VERSION))
        f.write(struct.pack("<Q", len(arrays)))
        for arr in arrays:
            f.write(struct.pack("<I", arr.ndim))
            for dim in arr.shape:
                f.write(struct.pack("<Q", dim))
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Read a checkpoint back as a list of float arrays."""
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: bad checkpoint magic {magic!r}")
        (version,) = struct.unpack("<I", f.read(4))
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        (count,) = struct.unpack("<Q", f.read(8))
        arrays = []
        for _ in range(count):
            (rank,) = struct.unpack("<I", f.read(4))
            dims = struct.unpack(f"<{rank}Q", f.read(8 * rank))
            size = int(np.prod(dims)) if rank else 1
            data = np.frombuffer(f.read(8 * size), dtype="<f8").reshape(dims)
            arrays.append(np.array(data, dtype=np.float64))
        return arrays


def set_parameters(params, arrays):
    """Load checkpoint arrays into an encoder's parameters, in order."""
    targets = params.parameters()
    if len(targets) != len(arrays):
        raise ValueError(f"checkpoint has {len(arrays)} arrays, encoder has {len(targets)}")
    for t, arr in zip(targets, arrays):
        if t.data.shape != arr.shape:
            raise ValueError(f"parameter shape mismatch: {t.data.shape} vs {arr.shape}")
        t.data = np.array(arr, dtype=np.float64)
