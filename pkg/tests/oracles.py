"""Independent reference implementations used as test oracles.

Everything here is deliberately written as plain-Python double loops over
scalars (math.exp, explicit sums) so the tensor paths are checked against
code that shares none of their structure.
"""

import math


def softmax_scalar(xs):
    finite = [x for x in xs if x != float("-inf")]
    if not finite:
        raise ValueError("all -inf")
    m = max(finite)
    exps = [math.exp(x - m) if x != float("-inf") else 0.0 for x in xs]
    total = sum(exps)
    return [e / total for e in exps]


def listnet_ce_scalar(g, s):
    pg = softmax_scalar(list(g))
    ps = softmax_scalar(list(s))
    total = 0.0
    for tgt, pred in zip(pg, ps):
        if tgt != 0.0:
            total -= tgt * math.log(pred)
    return total


def dot_scalar(a, b):
    return sum(x * y for x, y in zip(a, b))


def info_nce_scalar(query, positive, negatives, tau):
    pos = math.exp(dot_scalar(query, positive) / tau)
    denom = pos + sum(math.exp(dot_scalar(query, n) / tau) for n in negatives)
    return -math.log(pos / denom)


def coarse_loss_scalar(z, views, negatives, judgments, tau):
    """Vector-form listwise loss for one node: positives then negatives,
    all scored against the clean embedding, own softmax denominator."""
    scores = [dot_scalar(z, v) / tau for v in views]
    scores += [dot_scalar(z, n) / tau for n in negatives]
    targets = list(judgments) + [float("-inf")] * len(negatives)
    return listnet_ce_scalar(targets, scores)


def score_matrix_scalar(z, views, negatives, tau):
    return [
        [dot_scalar(v, z) / tau] + [dot_scalar(v, n) / tau for n in negatives]
        for v in views
    ]


def flat_softmax_scalar(matrix):
    flat = [x for row in matrix for x in row]
    probs = softmax_scalar(flat)
    width = len(matrix[0])
    return [probs[i * width:(i + 1) * width] for i in range(len(matrix))]


def fine_ground_truth_scalar(z, negatives, tau):
    return [dot_scalar(z, z) / tau] + [dot_scalar(z, n) / tau for n in negatives]


def judgment_matrix_scalar(judgments, g_n, alpha):
    m = len(judgments)
    sig_j = softmax_scalar(list(judgments))
    sig_g = softmax_scalar(list(g_n))
    out = []
    for i in range(m):
        row = [(1.0 - alpha) / m * p for p in sig_g]
        row[0] += alpha * sig_j[i]
        out.append(row)
    return out


def fine_loss_scalar(sigma_s, g_n):
    m = len(sigma_s)
    sig_g = softmax_scalar(list(g_n))
    total = 0.0
    for i in range(m):
        for j, p in enumerate(sigma_s[i]):
            total -= (sig_g[j] / m) * math.log(p)
    return total


def c2f_loss_scalar(z_rows, view_rows, bank_rows, neg_idx, judgments, alpha, tau):
    """Fully scalar double-loop version of the batched ranking loss.

    z_rows: N lists; view_rows: M lists of N lists; bank_rows: lists;
    neg_idx: N lists of K ints.
    """
    n = len(z_rows)
    total = 0.0
    for node in range(n):
        z = z_rows[node]
        negatives = [bank_rows[k] for k in neg_idx[node]]
        views = [view_rows[m][node] for m in range(len(view_rows))]
        scores = score_matrix_scalar(z, views, negatives, tau)
        sigma = flat_softmax_scalar(scores)
        g_n = fine_ground_truth_scalar(z, negatives, tau)
        judg = judgment_matrix_scalar(judgments, g_n, alpha)
        node_loss = 0.0
        for i in range(len(views)):
            for j in range(len(negatives) + 1):
                if judg[i][j] != 0.0:
                    node_loss -= judg[i][j] * math.log(sigma[i][j])
        total += node_loss
    return total / n


def gat_layer_scalar(features, adjacency, w, a_src_heads, a_dst_heads,
                     slope=0.2, concat=True):
    """Naive per-node double-loop attention layer.

    features: N x d_in nested lists; adjacency: N x N 0/1 nested lists;
    w: d_in x (H*U); a_src_heads/a_dst_heads: H lists of U floats.
    Self-loops are added; heads are concatenated or averaged; no output
    activation.
    """
    n = len(features)
    heads = len(a_src_heads)
    units = len(a_src_heads[0])

    def leaky(x):
        return x if x > 0 else slope * x

    projected = [
        [sum(features[i][p] * w[p][c] for p in range(len(features[i])))
         for c in range(heads * units)]
        for i in range(n)
    ]
    per_head = []
    for h in range(heads):
        wh = [row[h * units:(h + 1) * units] for row in projected]
        src = [dot_scalar(wh[i], a_src_heads[h]) for i in range(n)]
        dst = [dot_scalar(wh[i], a_dst_heads[h]) for i in range(n)]
        out = []
        for i in range(n):
            neigh = [j for j in range(n) if adjacency[i][j] or j == i]
            logits = [leaky(src[i] + dst[j]) for j in neigh]
            att = softmax_scalar(logits)
            out.append([
                sum(att[idx] * wh[j][u] for idx, j in enumerate(neigh))
                for u in range(units)
            ])
        per_head.append(out)
    if concat:
        return [
            [v for h in range(heads) for v in per_head[h][i]] for i in range(n)
        ]
    return [
        [sum(per_head[h][i][u] for h in range(heads)) / heads for u in range(units)]
        for i in range(n)
    ]


def gcn_layer_scalar(features, adjacency, w):
    """Dense-matrix normalized propagation, written with explicit loops."""
    n = len(features)
    a_tilde = [[adjacency[i][j] + (1 if i == j else 0) for j in range(n)]
               for i in range(n)]
    deg = [sum(row) for row in a_tilde]
    norm = [[a_tilde[i][j] / math.sqrt(deg[i] * deg[j]) for j in range(n)]
            for i in range(n)]
    hw = [
        [sum(features[i][p] * w[p][c] for p in range(len(features[i])))
         for c in range(len(w[0]))]
        for i in range(n)
    ]
    return [
        [sum(norm[i][j] * hw[j][c] for j in range(n)) for c in range(len(w[0]))]
        for i in range(n)
    ]
