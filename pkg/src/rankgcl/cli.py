"""Command-line surface for reproducible runs.

Every subcommand validates its inputs, is deterministic under --seed, and
writes only to the paths it was given. Failures exit with status 1 and a
single `error: ...` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .evaluation import (linear_probe, make_split, similarity_diagnostics,
                         write_metrics_csv)
from .fileio import load_embeddings, save_embeddings, write_graph_files
from .graphs import SbmSpec, generate_sbm, load_graph
from .training import (config_from_dict, config_to_dict, load_checkpoint,
                       pretrain, save_checkpoint, set_parameters)
from .verification import run_all_checks

__all__ = ["main"]


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}")


def _add_graph_args(p, labels_required=False):
    p.add_argument("--edges", required=True, help="edge list file")
    p.add_argument("--features", required=True, help="feature CSV file")
    p.add_argument("--labels", required=labels_required, default=None,
                   help="label file, one class index per line")


def _load_config(path, seed_override=None):
    with open(path) as f:
        raw = json.load(f)
    cfg = config_from_dict(raw)
    if seed_override is not None:
        cfg = replace(cfg, seed=seed_override)
    return cfg


def _labels_from_file(path):
    labels = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                labels.append(int(line))
    return np.asarray(labels, dtype=np.int64)


def cmd_synth(args):
    spec = SbmSpec(tuple(args.block_sizes), args.p_in, args.p_out,
                   args.feature_dim, args.mean_separation, args.seed)
    graph = generate_sbm(spec)
    write_graph_files(graph, args.out_edges, args.out_features, args.out_labels)
    print(f"wrote {graph.num_nodes} nodes, {graph.num_undirected_edges} undirected edges")
    return 0


def cmd_pretrain(args):
    cfg = _load_config(args.config, args.seed)
    if args.dump_config:
        with open(args.dump_config, "w") as f:
            json.dump(config_to_dict(cfg), f, indent=2)
            f.write("\n")
    graph = load_graph(args.edges, args.features, args.labels)
    result = pretrain(graph, cfg)
    save_checkpoint(args.out_checkpoint, result.params)
    save_embeddings(args.out_embeddings, result.embeddings)
    print(f"iterations={cfg.iterations} first_loss={result.loss_history[0]:.6f} "
          f"final_loss={result.loss_history[-1]:.6f}")
    return 0


def cmd_probe(args):
    z = load_embeddings(args.embeddings)
    labels = _labels_from_file(args.labels)
    if labels.size != z.shape[0]:
        raise ValueError(f"{labels.size} labels for {z.shape[0]} embedding rows")
    split = make_split(labels, args.per_class_train, args.per_class_val, args.seed)
    report = linear_probe(z, labels, split, epochs=args.epochs,
                          weight_decay=args.weight_decay, lr=args.lr, seed=args.seed)
    write_metrics_csv(args.out, [(args.run_id, args.seed, report)])
    print(f"accuracy={report.accuracy:.6f}")
    return 0


def _ablation_configs(base):
    """The four controlled loss configurations sharing one view list."""
    equal = tuple(replace(v, judgment=1.0) for v in base.views)
    return [
        ("vanilla", replace(base, ablation_mode="vanilla", alpha=1.0, views=equal)),
        ("coarse", replace(base, ablation_mode="coarse", alpha=1.0)),
        ("fine", replace(base, ablation_mode="fine", views=equal)),
        ("c2f", replace(base, ablation_mode="c2f")),
    ]


def cmd_ablate(args):
    base = _load_config(args.config, args.seed)
    graph = load_graph(args.edges, args.features, args.labels)
    rows = []
    for mode, cfg in _ablation_configs(base):
        reports = []
        for s in range(args.seeds):
            run_cfg = replace(cfg, seed=cfg.seed + s)
            result = pretrain(graph, run_cfg)
            split = make_split(graph.labels, args.per_class_train,
                               args.per_class_val, seed=run_cfg.seed)
            reports.append(linear_probe(result.embeddings, graph.labels, split,
                                        seed=run_cfg.seed))
        rows.append((mode, [
            float(np.mean([getattr(r, field) for r in reports]))
            for field in ("accuracy", "macro_f1", "macro_auc", "macro_recall")
        ]))
    with open(args.out, "w") as f:
        f.write("mode,seeds,accuracy,f1,auc,recall\n")
        for mode, (acc, f1, auc, rec) in rows:
            f.write(f"{mode},{args.seeds},{acc:.6f},{f1:.6f},{auc:.6f},{rec:.6f}\n")
    for mode, (acc, *_rest) in rows:
        print(f"{mode}: accuracy={acc:.6f}")
    return 0


def cmd_diagnose(args):
    cfg = _load_config(args.config, args.seed)
    graph = load_graph(args.edges, args.features, args.labels)
    from .training import _init_params  # architecture must match the checkpoint

    params = _init_params(graph, cfg, np.random.default_rng(cfg.seed))
    set_parameters(params, load_checkpoint(args.checkpoint))
    rows = similarity_diagnostics(graph, params, args.ratios,
                                  num_seeds=args.view_seeds, seed=cfg.seed)
    with open(args.out, "w") as f:
        f.write("ratio,inter_view_similarity,intra_view_similarity\n")
        for ratio, inter, intra in rows:
            f.write(f"{ratio:.6f},{inter:.6f},{intra:.6f}\n")
    for ratio, inter, intra in rows:
        print(f"ratio={ratio:g} inter={inter:.6f} intra={intra:.6f}")
    return 0


def cmd_verify(args):
    results = run_all_checks(seed=args.seed)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.detail}")
        failed += 0 if r.passed else 1
    if failed:
        raise ValueError(f"{failed} verification check(s) failed")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rankgcl",
        description="Self-supervised graph embeddings via ranked contrastive views.")
    parser.add_argument("--threads", type=int, default=1,
                        help="cap on worker parallelism (execution is single-threaded)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a stochastic-block-model graph")
    p.add_argument("--block-sizes", type=_int_list, required=True)
    p.add_argument("--p-in", type=float, required=True)
    p.add_argument("--p-out", type=float, required=True)
    p.add_argument("--feature-dim", type=int, required=True)
    p.add_argument("--mean-separation", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-edges", required=True)
    p.add_argument("--out-features", required=True)
    p.add_argument("--out-labels", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pretrain", help="run self-supervised pre-training")
    p.add_argument("--config", required=True, help="JSON training configuration")
    _add_graph_args(p)
    p.add_argument("--out-checkpoint", required=True)
    p.add_argument("--out-embeddings", required=True)
    p.add_argument("--dump-config", default=None,
                   help="write the resolved configuration to this path")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("probe", help="train a linear probe on frozen embeddings")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--per-class-train", type=int, default=20)
    p.add_argument("--per-class-val", type=int, default=30)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--weight-decay", type=float, default=0.0)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--run-id", default="probe")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("ablate", help="compare vanilla/coarse/fine/full losses")
    p.add_argument("--config", required=True)
    _add_graph_args(p, labels_required=True)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--per-class-train", type=int, default=20)
    p.add_argument("--per-class-val", type=int, default=30)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("diagnose", help="view-similarity diagnostics vs drop ratio")
    p.add_argument("--config", required=True)
    p.add_argument("--checkpoint", required=True)
    _add_graph_args(p)
    p.add_argument("--ratios", type=_float_list, required=True)
    p.add_argument("--view-seeds", type=int, default=5)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("verify", help="run the oracle self-check suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except Exception as e:  # single-line machine-parsable failure
        message = " ".join(str(e).split())
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
