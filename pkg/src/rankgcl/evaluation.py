"""Frozen-encoder evaluation: stratified splits, a linear softmax probe,
classification metrics, and view-similarity diagnostics.

The probe trains softmax regression on frozen embeddings with full-batch
Adam, picks the epoch with the best validation accuracy, and only then
scores the test set; test labels feed nothing but the final metric
computation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .augment import drop_edge
from .encoders import encode

__all__ = ["Split", "MetricsReport", "make_split", "linear_probe",
           "compute_metrics", "similarity_diagnostics", "write_metrics_csv",
           "METRICS_CSV_HEADER"]

METRICS_CSV_HEADER = "run_id,seed,accuracy,f1,auc,recall"


@dataclass(frozen=True)
class Split:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for name in ("train", "val", "test"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        if self.train.size == 0:
            raise ValueError("train split is empty")
        combined = np.concatenate([self.train, self.val, self.test])
        if np.unique(combined).size != combined.size:
            raise ValueError("split index lists overlap")


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    macro_f1: float
    macro_auc: float
    macro_recall: float


def make_split(labels, per_class_train, per_class_val, seed):
    """Stratified split: sample fixed counts per class for train and
    validation, remainder is test."""
    labels = np.asarray(labels, dtype=np.int64)
    rng = np.random.default_rng(seed)
    train, val, test = [], [], []
    for c in np.unique(labels):
        members = np.nonzero(labels == c)[0]
        need = per_class_train + per_class_val
        if members.size < need:
            raise ValueError(
                f"class {c} has {members.size} nodes, needs {need} for the split")
        members = rng.permutation(members)
        train.append(members[:per_class_train])
        val.append(members[per_class_train:need])
        test.append(members[need:])
    return Split(np.sort(np.concatenate(train)),
                 np.sort(np.concatenate(val)),
                 np.sort(np.concatenate(test)))


def _softmax(x):
    m = x.max(axis=1, keepdims=True)
    e = np.exp(x - m)
    return e / e.sum(axis=1, keepdims=True)


def linear_probe(z, labels, split, epochs=300, weight_decay=0.0, lr=0.01, seed=0):
    """Train a one-layer softmax classifier on the train split of frozen
    embeddings and report test metrics at the best validation epoch."""
    z = np.asarray(z, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    num_classes = int(labels.max()) + 1
    y_train = labels[split.train]
    if np.unique(y_train).size < 2:
        raise ValueError("train split contains a single class; probe is degenerate")

    rng = np.random.default_rng(seed)
    x = z[split.train]
    onehot = np.zeros((x.shape[0], num_classes))
    onehot[np.arange(x.shape[0]), y_train] = 1.0
    w = rng.uniform(-0.01, 0.01, size=(z.shape[1], num_classes))
    b = np.zeros(num_classes)

    mw = np.zeros_like(w)
    vw = np.zeros_like(w)
    mb = np.zeros_like(b)
    vb = np.zeros_like(b)
    beta1, beta2, eps = 0.9, 0.999, 1e-8

    best_val = -1.0
    best = (w.copy(), b.copy())
    for t in range(1, epochs + 1):
        probs = _softmax(x @ w + b)
        g = (probs - onehot) / x.shape[0]
        gw = x.T @ g + weight_decay * w
        gb = g.sum(axis=0)
        mw = beta1 * mw + (1 - beta1) * gw
        vw = beta2 * vw + (1 - beta2) * gw * gw
        mb = beta1 * mb + (1 - beta1) * gb
        vb = beta2 * vb + (1 - beta2) * gb * gb
        w = w - lr * (mw / (1 - beta1 ** t)) / (np.sqrt(vw / (1 - beta2 ** t)) + eps)
        b = b - lr * (mb / (1 - beta1 ** t)) / (np.sqrt(vb / (1 - beta2 ** t)) + eps)
        if split.val.size:
            val_pred = np.argmax(z[split.val] @ w + b, axis=1)
            val_acc = float(np.mean(val_pred == labels[split.val]))
            if val_acc > best_val:
                best_val = val_acc
                best = (w.copy(), b.copy())
    if split.val.size == 0:
        best = (w, b)

    w, b = best
    test_probs = _softmax(z[split.test] @ w + b)
    return compute_metrics(test_probs, labels[split.test])


def _binary_auc(scores, positives):
    """Rank-based AUC with tie credit 0.5."""
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size)
    sorted_scores = scores[order]
    ranks[order] = np.arange(1, scores.size + 1)
    # average ranks over ties
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        if j > i:
            ranks[order[i:j + 1]] = 0.5 * (i + 1 + j + 1)
        i = j + 1
    n_pos = int(positives.sum())
    n_neg = positives.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    rank_sum = ranks[positives].sum()
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def compute_metrics(probs, y_true):
    """Accuracy plus macro F1 / one-vs-rest AUC / recall over the classes
    present in ``y_true``."""
    probs = np.asarray(probs, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.argmax(probs, axis=1)
    accuracy = float(np.mean(y_pred == y_true))

    f1s, recalls, aucs = [], [], []
    for c in np.unique(y_true):
        tp = np.sum((y_pred == c) & (y_true == c))
        fp = np.sum((y_pred == c) & (y_true != c))
        fn = np.sum((y_pred != c) & (y_true == c))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * precision * recall / (precision + recall)
                   if precision + recall else 0.0)
        recalls.append(recall)
        auc = _binary_auc(probs[:, c], y_true == c)
        if auc is not None:
            aucs.append(auc)
    return MetricsReport(accuracy, float(np.mean(f1s)), float(np.mean(aucs)),
                         float(np.mean(recalls)))


def _cosine_rows(a, b):
    """Per-row cosine similarity; bitwise-equal rows score exactly 1."""
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    denom = na * nb
    out = np.zeros(a.shape[0])
    ok = denom > 0
    out[ok] = np.sum(a[ok] * b[ok], axis=1) / denom[ok]
    equal = np.all(a == b, axis=1) & (na > 0)
    out[equal] = 1.0
    return out


def _mean_pairwise_cosine(z):
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    unit = z / safe
    gram = unit @ unit.T
    n = z.shape[0]
    return float((gram.sum() - np.trace(gram)) / (n * (n - 1)))


def similarity_diagnostics(graph, params, drop_ratios, num_seeds=5, seed=0):
    """For each edge-drop ratio: the mean cosine similarity between each
    node's clean and perturbed-view embeddings, and the mean pairwise
    cosine within the view, averaged over ``num_seeds`` fresh views.

    Returns a list of (ratio, inter_view, intra_view) rows in ratio order.
    """
    for r in drop_ratios:
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"drop ratio must be in [0, 1], got {r}")
    z = np.array(encode(graph, params).data)
    rng = np.random.default_rng(seed)
    rows = []
    for ratio in drop_ratios:
        inter, intra = [], []
        for _ in range(num_seeds):
            view = drop_edge(graph, ratio, rng)
            zv = np.array(encode(view, params).data)
            inter.append(float(np.mean(_cosine_rows(z, zv))))
            intra.append(_mean_pairwise_cosine(zv))
        rows.append((float(ratio), float(np.mean(inter)), float(np.mean(intra))))
    return rows


def write_metrics_csv(path, rows):
    """Rows of (run_id, seed, MetricsReport) in fixed 6-decimal format."""
    with open(path, "w") as f:
        f.write(METRICS_CSV_HEADER + "\n")
        for run_id, seed, report in rows:
            f.write(f"{run_id},{seed},{report.accuracy:.6f},{report.macro_f1:.6f},"
                    f"{report.macro_auc:.6f},{report.macro_recall:.6f}\n")
