"""Self-check suite behind the `verify` subcommand.

Each check re-derives a core identity of the loss construction from an
independent direction (closed forms, brute-force scalars, or finite
differences) and returns a pass/fail record. These are the fast desk
checks; the full property suite lives in the package's tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .augment import drop_edge
from .encoders import GatLayerParams, GatParams, encode, init_gat_params
from .graphs import SbmSpec, generate_sbm
from .losses import (SimilarityConfig, c2f_loss, c2f_node_loss, coarse_loss,
                     fine_loss, fine_targets_matrix, info_nce,
                     judgment_matrices, listnet_ce, score_matrix)
from .training import NegativeBank, default_config

__all__ = ["run_all_checks", "CheckResult", "flatten_params", "unpack_gat_params"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def flatten_params(params):
    """All encoder parameters as one 1 x P row (plain array)."""
    return np.concatenate([p.data.reshape(-1) for p in params.parameters()])[None, :]


def unpack_gat_params(flat, template):
    """Rebuild a GatParams whose tensors are differentiable views into the
    1 x P row tensor ``flat``, shaped like ``template``."""
    offset = 0

    def take(shape):
        nonlocal offset
        size = int(np.prod(shape))
        piece = ad.reshape(ad.slice_cols(flat, offset, offset + size), shape)
        offset += size
        return piece

    layers = []
    for layer in template.layers:
        w = take(layer.w.data.shape)
        a_src = [take(a.data.shape) for a in layer.a_src]
        a_dst = [take(a.data.shape) for a in layer.a_dst]
        layers.append(GatLayerParams(w, a_src, a_dst, layer.units, layer.concat))
    return GatParams(layers)


def check_infonce_is_listwise(trials=200, seed=0):
    """InfoNCE must equal the listwise cross-entropy whose target puts
    score 0 on the positive and -inf on every negative."""
    rng = np.random.default_rng(seed)
    cfg = SimilarityConfig(temperature=0.1)
    worst = 0.0
    dims = [4, 16, 64]
    ks = [1, 8, 64]
    for t in range(trials):
        d = dims[t % len(dims)]
        k = ks[(t // len(dims)) % len(ks)]
        q = rng.standard_normal(d)
        p = rng.standard_normal(d)
        negs = rng.standard_normal((k, d))
        lhs = info_nce(q, p, negs, cfg).item()
        scores = np.concatenate([[q @ p], negs @ q]) / cfg.temperature
        target = np.concatenate([[0.0], np.full(k, -np.inf)])
        rhs = listnet_ce(target, scores).item()
        worst = max(worst, abs(lhs - rhs))
    return CheckResult("infonce_equals_listwise_onehot", worst < 1e-10,
                       f"max |difference| = {worst:.3e} over {trials} instances")


def _ordered_judgments(rng, m):
    while True:
        judgments = np.sort(rng.uniform(0.05, 3.0, size=m))[::-1]
        if np.unique(judgments).size == m:
            return judgments


def check_judgment_normalization(seed=0):
    """The blended judgment matrix must sum to exactly one for every
    mixing weight."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for alpha in (0.0, 0.25, 0.5, 0.75, 1.0):
        for m in (1, 2, 3):
            for k in (1, 4, 16):
                judgments = _ordered_judgments(rng, m)
                g_n = rng.standard_normal(k + 1) * 5.0
                _, _, j_all = judgment_matrices(judgments, g_n, alpha, m, k)
                worst = max(worst, abs(j_all.sum() - 1.0))
    return CheckResult("judgment_matrix_sums_to_one", worst < 1e-12,
                       f"max |sum - 1| = {worst:.3e}")


def check_judgment_ordering(trials=100, seed=0):
    """With strictly ordered judgments and alpha > 0, column 0 of the
    blended matrix must decrease strictly down the rows, and blending must
    pull each row ratio toward (but keep it above) one."""
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        m = int(rng.integers(2, 5))
        k = int(rng.integers(1, 6))
        alpha = float(rng.uniform(0.05, 0.99))
        judgments = _ordered_judgments(rng, m)
        g_n = rng.standard_normal(k + 1) * 3.0
        j_coarse, _, j_all = judgment_matrices(judgments, g_n, alpha, m, k)
        col = j_all[:, 0]
        if not np.all(np.diff(col) < 0):
            return CheckResult("judgment_column_ordering", False,
                               f"column 0 not strictly decreasing: {col}")
        for i in range(m):
            for j in range(i + 1, m):
                pure = j_coarse[i, 0] / j_coarse[j, 0]
                blended = col[i] / col[j]
                if not pure > blended > 1.0:
                    return CheckResult(
                        "judgment_column_ordering", False,
                        f"ratio chain violated: {pure} > {blended} > 1")
    return CheckResult("judgment_column_ordering", True,
                       f"{trials} random instances ordered correctly")


def check_primitive_gradients(seed=0, tol=1e-4):
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal((3, 4))
    w = ad.tensor(rng.standard_normal((4, 3)))
    weights = ad.tensor(np.arange(12.0).reshape(3, 4))
    cases = {
        "matmul": lambda t: ad.reduce_sum(ad.matmul(t, w)),
        "hadamard": lambda t: ad.reduce_sum(ad.hadamard(t, t)),
        "exp": lambda t: ad.reduce_sum(ad.exp(t)),
        "row_softmax": lambda t: ad.reduce_sum(
            ad.hadamard(ad.row_softmax(t), weights)),
        "row_log_softmax": lambda t: ad.reduce_sum(
            ad.hadamard(ad.row_log_softmax(t), weights)),
        "elu": lambda t: ad.reduce_sum(ad.elu(t)),
        "leaky_relu": lambda t: ad.reduce_sum(ad.leaky_relu(t)),
        "row_l2_normalize": lambda t: ad.reduce_sum(ad.row_l2_normalize(t)),
    }
    worst_name, worst = "", 0.0
    for name, f in cases.items():
        err = ad.grad_check(f, ad.tensor(x0))
        if err > worst:
            worst_name, worst = name, err
    return CheckResult("primitive_gradients", worst < tol,
                       f"max rel. err {worst:.3e} ({worst_name})")


def check_loss_gradients(seed=0, tol=1e-4):
    rng = np.random.default_rng(seed)
    cfg = SimilarityConfig(temperature=0.5)
    d, k, m = 5, 3, 2
    q0 = ad.tensor(rng.standard_normal((1, d)))
    pos = ad.tensor(rng.standard_normal((1, d)))
    negs = ad.tensor(rng.standard_normal((k, d)))
    views0 = ad.tensor(rng.standard_normal((m, d)))
    judgments = np.array([1.0, 0.7])
    g_n = rng.standard_normal(k + 1)

    errs = {
        "info_nce": ad.grad_check(lambda q: info_nce(q, pos, negs, cfg), q0),
        "listnet_ce": ad.grad_check(
            lambda s: listnet_ce(np.array([1.0, 0.7, -np.inf]), s),
            ad.tensor(rng.standard_normal((1, 3)))),
        "coarse_loss": ad.grad_check(
            lambda q: coarse_loss(q, views0, negs, judgments, cfg), q0),
        "fine_loss": ad.grad_check(
            lambda v: fine_loss(score_matrix(q0, v, negs, cfg)[1], g_n), views0),
        "c2f_node_loss": ad.grad_check(
            lambda v: c2f_node_loss(q0, v, negs, judgments, 0.8, cfg), views0),
    }
    worst_name = max(errs, key=errs.get)
    worst = errs[worst_name]
    return CheckResult("loss_gradients", worst < tol,
                       f"max rel. err {worst:.3e} ({worst_name})")


def check_end_to_end_gradient(seed=0, tol=1e-4):
    """Finite-difference check of the full objective, through a two-layer
    attention encoder, with respect to every encoder parameter at once."""
    graph = generate_sbm(SbmSpec((5, 5), 0.6, 0.2, 4, 1.0, seed=seed))
    rng = np.random.default_rng(seed + 1)
    template = init_gat_params(graph.feature_dim, rng, num_layers=2, heads=2,
                               hidden_units=3, out_dim=3)
    cfg = default_config(graph.num_nodes, num_negatives=4, seed=seed)

    aug_rng = np.random.default_rng(seed + 2)
    views = [drop_edge(graph, 0.3, aug_rng), drop_edge(graph, 0.6, aug_rng)]
    frozen = encode(graph, template)
    bank = NegativeBank.draw(frozen.data, cfg.num_negatives,
                             np.random.default_rng(seed + 3))
    # Pin the self-generated targets at the unperturbed point: they are
    # constants of the objective, so the difference oracle must not move them.
    targets = fine_targets_matrix(frozen.data, bank.embeddings, bank.indices,
                                  cfg.similarity)

    def objective(flat):
        params = unpack_gat_params(flat, template)
        z = encode(graph, params)
        zv = [encode(v, params) for v in views]
        return c2f_loss(z, zv, bank.embeddings, bank.indices,
                        cfg.judgments, cfg.alpha, cfg.similarity,
                        fine_targets=targets)

    err = ad.grad_check(objective, ad.tensor(flatten_params(template)))
    return CheckResult("end_to_end_gradient", err < tol,
                       f"max rel. err {err:.3e} over all encoder parameters")


def check_batched_matches_per_node(seed=0, tol=1e-9):
    """The batched loss must agree with per-node assembly from the
    individual score/judgment pieces."""
    rng = np.random.default_rng(seed)
    n, d, m, k = 6, 4, 2, 3
    cfg = SimilarityConfig(temperature=0.1)
    z = ad.tensor(rng.standard_normal((n, d)))
    views = [ad.tensor(rng.standard_normal((n, d))) for _ in range(m)]
    bank = rng.standard_normal((n, d))
    idx = np.stack([
        rng.choice([i for i in range(n) if i != node], size=k, replace=False)
        for node in range(n)
    ])
    judgments = np.array([1.0, 0.7])
    batched = c2f_loss(z, views, bank, idx, judgments, 0.8, cfg).item()
    per_node = np.mean([
        c2f_node_loss(
            ad.gather_rows(z, [node]),
            ad.concat_rows([ad.gather_rows(v, [node]) for v in views]),
            ad.tensor(bank[idx[node]]), judgments, 0.8, cfg,
        ).item()
        for node in range(n)
    ])
    diff = abs(batched - per_node)
    return CheckResult("batched_equals_per_node", diff < tol,
                       f"|difference| = {diff:.3e}")


def run_all_checks(seed=0):
    return [
        check_infonce_is_listwise(seed=seed),
        check_judgment_normalization(seed=seed),
        check_judgment_ordering(seed=seed),
        check_primitive_gradients(seed=seed),
        check_loss_gradients(seed=seed),
        check_end_to_end_gradient(seed=seed),
        check_batched_matches_per_node(seed=seed),
    ]
