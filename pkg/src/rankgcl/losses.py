"""Listwise ranking losses for contrastive pre-training.

The unifying object is a per-node score matrix S_n with one row per
augmented view: column 0 scores the view against the node's clean
embedding, columns 1..K score it against K sampled negatives. Scores are
normalized with a single softmax over all M*(K+1) entries and compared,
via cross-entropy, against a judgment probability matrix J that blends

  * a coarse target: softmax of the per-view judgment scores, placed in
    column 0 (negatives pinned to -inf, hence zero mass), and
  * a fine-grained target: the node's own similarity profile against the
    same negatives, measured on detached embeddings, softmaxed and spread
    evenly across the M rows,

weighted alpha and (1 - alpha). J always sums to exactly one, so the
cross-entropy is a proper listwise ranking objective; the plain InfoNCE
objective is the special case of a one-hot target.

Targets are always the weights and predictions always sit inside the log.
Ground-truth vectors and judgment matrices are plain float arrays: they
are constants by construction and never carry gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor

__all__ = ["SimilarityConfig", "similarity", "info_nce", "listnet_ce",
           "coarse_ground_truth", "coarse_loss", "fine_ground_truth",
           "score_matrix", "matrix_softmax", "fine_loss",
           "judgment_matrices", "c2f_node_loss", "c2f_loss",
           "fine_targets_matrix", "np_softmax"]


@dataclass(frozen=True)
class SimilarityConfig:
    temperature: float = 0.1
    normalize_embeddings: bool = False

    def __post_init__(self):
        if not self.temperature > 0.0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")


def np_softmax(x):
    """Stable softmax over the last axis; -inf entries get exactly 0."""
    x = np.asarray(x, dtype=np.float64)
    m = np.max(x, axis=-1, keepdims=True)
    if np.isneginf(m).any():
        raise ValueError("softmax of an all--inf vector is undefined")
    e = np.exp(x - m)
    return e / np.sum(e, axis=-1, keepdims=True)


def _as_row(x):
    """Coerce a vector (Tensor or array, shape (d,) or (1, d)) to a 1 x d Tensor."""
    t = x if isinstance(x, Tensor) else ad.tensor(x)
    if t.data.ndim == 1:
        t = ad.reshape(t, (1, t.data.shape[0]))
    if t.data.ndim != 2 or t.data.shape[0] != 1:
        raise ValueError(f"expected a vector, got shape {t.data.shape}")
    return t


def _as_matrix(x):
    """Coerce a stack of vectors (Tensor, array, or list of vectors) to a 2-D Tensor."""
    if isinstance(x, Tensor):
        t = x
    elif isinstance(x, (list, tuple)):
        rows = [_as_row(v) for v in x]
        t = ad.concat_rows(rows)
    else:
        t = ad.tensor(np.asarray(x, dtype=np.float64))
    if t.data.ndim != 2:
        raise ValueError(f"expected a matrix of row vectors, got shape {t.data.shape}")
    return t


def _maybe_normalize(t, cfg):
    return ad.row_l2_normalize(t) if cfg.normalize_embeddings else t


def similarity(z1, z2, cfg):
    """Temperature-scaled dot product s(z1, z2) = z1.z2 / tau as a scalar
    Tensor; unit-normalizes both vectors first when configured."""
    a = _maybe_normalize(_as_row(z1), cfg)
    b = _maybe_normalize(_as_row(z2), cfg)
    if a.data.shape != b.data.shape:
        raise ValueError(f"similarity: shape mismatch {a.data.shape} vs {b.data.shape}")
    return ad.reshape(ad.scale(ad.matmul(a, ad.transpose(b)), 1.0 / cfg.temperature), ())


def _scores_against(query_row, rows, cfg):
    """1 x k row of temperature-scaled scores of one query against k rows."""
    return ad.scale(ad.matmul(query_row, ad.transpose(rows)), 1.0 / cfg.temperature)


def info_nce(query, positive, negatives, cfg):
    """Contrastive softmax cross-entropy for one query: the positive
    competes against K negatives, all scored against the query."""
    q = _maybe_normalize(_as_row(query), cfg)
    p = _maybe_normalize(_as_row(positive), cfg)
    negs = _maybe_normalize(_as_matrix(negatives), cfg)
    if negs.data.shape[0] < 1:
        raise ValueError("info_nce requires at least one negative")
    scores = ad.concat_cols([_scores_against(q, p, cfg), _scores_against(q, negs, cfg)])
    log_probs = ad.row_log_softmax(scores)
    one_hot = np.zeros((1, scores.data.shape[1]))
    one_hot[0, 0] = 1.0
    return ad.scale(ad.reduce_sum(ad.hadamard(ad.tensor(one_hot), log_probs)), -1.0)


def listnet_ce(g, s):
    """Top-one listwise cross-entropy between a ground-truth score list g
    and a predicted score list s: -sum softmax(g) * log softmax(s).

    g may contain -inf (zero target mass); s must be finite.
    """
    targets = g if isinstance(g, Tensor) else ad.tensor(np.asarray(g, dtype=np.float64))
    preds = s if isinstance(s, Tensor) else ad.tensor(np.asarray(s, dtype=np.float64))
    targets = targets if targets.data.ndim == 2 else ad.reshape(targets, (1, targets.data.size))
    preds = preds if preds.data.ndim == 2 else ad.reshape(preds, (1, preds.data.size))
    if targets.data.shape != preds.data.shape:
        raise ValueError(
            f"listnet_ce: score lists differ in shape "
            f"{targets.data.shape} vs {preds.data.shape}"
        )
    ce = ad.hadamard(ad.row_softmax(targets), ad.row_log_softmax(preds))
    return ad.scale(ad.reduce_sum(ce), -1.0)


def coarse_ground_truth(judgments, num_negatives):
    """Ground-truth score vector for coarse ranking: the M view judgments
    (strictly decreasing, positive) followed by K entries of -inf."""
    judgments = np.asarray(judgments, dtype=np.float64)
    if judgments.ndim != 1 or judgments.size < 1:
        raise ValueError("judgments must be a nonempty vector")
    if np.any(judgments <= 0.0):
        raise ValueError(f"judgments must be positive, got {judgments}")
    if np.any(np.diff(judgments) >= 0.0):
        raise ValueError(f"judgments must strictly decrease, got {judgments}")
    return np.concatenate([judgments, np.full(num_negatives, -np.inf)])


def coarse_loss(z_n, positives, negatives, judgments, cfg):
    """Listwise loss ranking a node's views above its negatives, all
    scored against the clean embedding, with the view order fixed by the
    judgment scores. Returns this node's term; callers average over nodes.
    """
    q = _maybe_normalize(_as_row(z_n), cfg)
    views = _maybe_normalize(_as_matrix(positives), cfg)
    negs = _maybe_normalize(_as_matrix(negatives), cfg)
    gc = coarse_ground_truth(judgments, negs.data.shape[0])
    if views.data.shape[0] != np.asarray(judgments).size:
        raise ValueError(
            f"{views.data.shape[0]} views but {np.asarray(judgments).size} judgments")
    scores = ad.concat_cols([_scores_against(q, views, cfg), _scores_against(q, negs, cfg)])
    return listnet_ce(gc, scores)


def fine_ground_truth(z_n, negatives, cfg):
    """Self-generated target scores for one node: entry 0 is the node's
    self-similarity, entries 1..K its similarity to each negative.
    Computed on detached values; returns a plain float array."""
    z = np.asarray(z_n.data if isinstance(z_n, Tensor) else z_n, dtype=np.float64).reshape(-1)
    negs = np.asarray(
        negatives.data if isinstance(negatives, Tensor) else negatives, dtype=np.float64
    ).reshape(-1, z.size)
    if cfg.normalize_embeddings:
        z = z / np.linalg.norm(z)
        negs = negs / np.linalg.norm(negs, axis=1, keepdims=True)
    out = np.empty(negs.shape[0] + 1)
    out[0] = z @ z / cfg.temperature
    out[1:] = negs @ z / cfg.temperature
    return out


def score_matrix(z_n, views, negatives, cfg):
    """Predicted M x (K+1) scores for one node and their global softmax.

    Row m holds s(view_m, z_n) followed by s(view_m, negative_k); the
    normalization is a single softmax over all M*(K+1) entries. Returns
    (raw scores, normalized matrix).
    """
    q = _maybe_normalize(_as_row(z_n), cfg)
    v = _maybe_normalize(_as_matrix(views), cfg)
    negs = _maybe_normalize(_as_matrix(negatives), cfg)
    col0 = ad.matmul(v, ad.transpose(q))
    cols = ad.matmul(v, ad.transpose(negs))
    raw = ad.scale(ad.concat_cols([col0, cols]), 1.0 / cfg.temperature)
    return raw, matrix_softmax(raw)


def matrix_softmax(t):
    """Softmax over every entry of a matrix jointly (flatten, softmax,
    reshape back). Entries sum to one globally."""
    m, k = t.data.shape
    return ad.reshape(ad.row_softmax(ad.reshape(t, (1, m * k))), (m, k))


def fine_loss(sigma_s, g_n):
    """Cross-entropy between the normalized prediction matrix and the
    self-generated target spread over rows: the target matrix repeats
    softmax(g_n)/M in each of the M rows. Per-node term."""
    m, k1 = sigma_s.data.shape
    g_n = np.asarray(g_n, dtype=np.float64)
    if g_n.shape != (k1,):
        raise ValueError(f"target vector has shape {g_n.shape}, expected ({k1},)")
    target = np.tile(np_softmax(g_n) / m, (m, 1))
    ce = ad.hadamard(ad.tensor(target), ad.log(sigma_s))
    return ad.scale(ad.reduce_sum(ce), -1.0)


def judgment_matrices(judgments, g_n, alpha, num_views, num_negatives):
    """Coarse, fine, and blended (alpha-weighted) judgment probability
    matrices, each M x (K+1) and each summing to one.

    The coarse matrix places softmax(judgments) in column 0; the fine
    matrix repeats softmax(g_n)/M in every row.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    judgments = np.asarray(judgments, dtype=np.float64)
    g_n = np.asarray(g_n, dtype=np.float64)
    if judgments.shape != (num_views,):
        raise ValueError(f"expected {num_views} judgments, got shape {judgments.shape}")
    if g_n.shape != (num_negatives + 1,):
        raise ValueError(
            f"expected fine target of length {num_negatives + 1}, got {g_n.shape}")
    j_coarse = np.zeros((num_views, num_negatives + 1))
    j_coarse[:, 0] = np_softmax(judgments)
    j_fine = np.tile(np_softmax(g_n) / num_views, (num_views, 1))
    j_all = alpha * j_coarse + (1.0 - alpha) * j_fine
    return j_coarse, j_fine, j_all


def c2f_node_loss(z_n, views, negatives, judgments, alpha, cfg):
    """One node's ranked cross-entropy, assembled from the per-node
    pieces: -sum J^a * log sigma(S_n)."""
    raw, _ = score_matrix(z_n, views, negatives, cfg)
    num_views, width = raw.data.shape
    g_n = fine_ground_truth(z_n, _as_matrix(negatives), cfg)
    _, _, j_all = judgment_matrices(judgments, g_n, alpha, num_views, width - 1)
    flat_logp = ad.row_log_softmax(ad.reshape(raw, (1, num_views * width)))
    ce = ad.hadamard(ad.tensor(j_all.reshape(1, -1)), flat_logp)
    return ad.scale(ad.reduce_sum(ce), -1.0)


def fine_targets_matrix(z_detached, bank, neg_indices, cfg):
    """Self-generated target scores for every node at once: row n is the
    fine ground truth [s(z_n, z_n), s(z_n, neg_1), ..., s(z_n, neg_K)]
    computed on detached values."""
    z_detached = np.asarray(z_detached, dtype=np.float64)
    bank = np.asarray(bank, dtype=np.float64)
    if cfg.normalize_embeddings:
        z_detached = z_detached / np.linalg.norm(z_detached, axis=1, keepdims=True)
        bank = bank / np.linalg.norm(bank, axis=1, keepdims=True)
    n, k = neg_indices.shape
    g = np.empty((n, k + 1))
    g[:, 0] = np.einsum("nd,nd->n", z_detached, z_detached) / cfg.temperature
    g[:, 1:] = np.einsum("nd,nkd->nk", z_detached, bank[neg_indices]) / cfg.temperature
    return g


def c2f_loss(z, views, bank, neg_indices, judgments, alpha, cfg, fine_targets=None):
    """Full-batch blended (coarse + fine-grained) ranking loss, averaged
    over nodes.

    ``z`` (N x d) and each entry of ``views`` (N x d) are live tensors;
    ``bank`` is the detached negative store (array) and ``neg_indices``
    (N x K) selects each node's negatives from it. Judgments must be
    positive and non-increasing; ties are allowed so that ablation modes
    can rank all views equally.

    The self-generated fine targets are recomputed from the detached
    current embeddings unless ``fine_targets`` (N x (K+1)) pins them,
    which derivative checks need: targets are constants of the objective,
    so a finite-difference oracle must not let them move.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    judgments = np.asarray(judgments, dtype=np.float64)
    if np.any(judgments <= 0.0) or np.any(np.diff(judgments) > 0.0):
        raise ValueError(f"judgments must be positive and non-increasing: {judgments}")
    views = list(views)
    num_views = len(views)
    if judgments.shape != (num_views,):
        raise ValueError(f"{num_views} views but judgments shape {judgments.shape}")
    n, dim = z.data.shape
    neg_indices = np.asarray(neg_indices, dtype=np.int64)
    if neg_indices.ndim != 2 or neg_indices.shape[0] != n:
        raise ValueError(f"neg_indices must be (N, K), got {neg_indices.shape}")
    num_neg = neg_indices.shape[1]
    bank = np.asarray(bank, dtype=np.float64)

    if cfg.normalize_embeddings:
        z = ad.row_l2_normalize(z)
        views = [ad.row_l2_normalize(v) for v in views]
        bank = bank / np.linalg.norm(bank, axis=1, keepdims=True)

    # Predicted scores, view-major: row m*N + n is view m of node n.
    stacked_views = ad.concat_rows(views)
    stacked_query = ad.concat_rows([z] * num_views)
    ones_col = ad.tensor(np.ones((dim, 1)))
    pos = ad.matmul(ad.hadamard(stacked_views, stacked_query), ones_col)
    all_neg = ad.matmul(stacked_views, ad.tensor(bank.T))
    neg = ad.take_per_row(all_neg, np.tile(neg_indices, (num_views, 1)))
    scores = ad.scale(ad.concat_cols([pos, neg]), 1.0 / cfg.temperature)

    # Regroup node-major and log-softmax each node's M*(K+1) block jointly.
    perm = (np.arange(num_views)[None, :] * n + np.arange(n)[:, None]).reshape(-1)
    flat = ad.reshape(ad.gather_rows(scores, perm), (n, num_views * (num_neg + 1)))
    log_probs = ad.row_log_softmax(flat)

    # Self-generated targets from detached embeddings. Normalization (when
    # enabled) already happened above for both z and bank.
    if fine_targets is None:
        plain = SimilarityConfig(cfg.temperature, False)
        g = fine_targets_matrix(z.data, bank, neg_indices, plain)
    else:
        g = np.asarray(fine_targets, dtype=np.float64)
        if g.shape != (n, num_neg + 1):
            raise ValueError(f"fine_targets shape {g.shape} != ({n}, {num_neg + 1})")

    sig_j = np_softmax(judgments)
    sig_g = np_softmax(g)
    judg = np.repeat((1.0 - alpha) / num_views * sig_g[:, None, :], num_views, axis=1)
    judg[:, :, 0] += alpha * sig_j[None, :]
    judg = judg.reshape(n, num_views * (num_neg + 1))

    ce = ad.hadamard(ad.tensor(judg), log_probs)
    return ad.scale(ad.reduce_sum(ce), -1.0 / n)
