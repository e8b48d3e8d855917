"""Command-line interface: ``train``, ``hyperbolicity`` and ``export``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import data as gdata
from . import manifold, train
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import ConfigError, config_to_dict, load_config

log = logging.getLogger("lorentz")

REPORT_SCHEMA_VERSION = 1


def _threads():
    try:
        return max(1, int(os.environ.get("LORENTZ_THREADS", "1")))
    except ValueError:
        return 1


def _write_embeddings(path, emb, hyperbolic, K):
    if hyperbolic:
        coords = manifold.to_poincare(emb, K)
        prefix = "p"
    else:
        coords = np.asarray(emb)
        prefix = "e"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(["node_id"] + [f"{prefix}{k + 1}" for k in range(coords.shape[1])]) + "\n")
        for i, row in enumerate(coords):
            fh.write(",".join([str(i)] + [repr(float(v)) for v in row]) + "\n")


def run_training(cfg, config_dir=None):
    """Train every seed of ``cfg``; write outputs and return the report dict."""
    graph = gdata.load_dataset(cfg.dataset, base_dir=config_dir)
    prep = train.prepare(cfg, graph)
    out_dir = Path(cfg.output_dir)
    if config_dir is not None and not out_dir.is_absolute():
        out_dir = Path(config_dir) / out_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    timings = {}

    def one(seed):
        t0 = time.perf_counter()
        res = train.train_seed(cfg, prep, seed)
        timings[seed] = time.perf_counter() - t0
        return res

    started = time.perf_counter()
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(one, cfg.seeds))

    hyperbolic = cfg.model == "hgcn"
    per_seed = []
    for res in results:
        K_last = res.curvatures[-1] if hyperbolic else None
        _write_embeddings(out_dir / f"embeddings_{res.seed}.csv", res.embeddings, hyperbolic, K_last)
        tensors = dict(res.params)
        tensors["embeddings"] = res.embeddings
        save_checkpoint(
            out_dir / f"checkpoint_{res.seed}.ckpt",
            tensors,
            {"model": cfg.model, "task": cfg.task, "seed": res.seed, "curvatures": res.curvatures},
        )
        entry = {
            "seed": res.seed,
            "test_metric": res.test_metric,
            "val_metric": res.val_metric,
            "best_epoch": res.best_epoch,
            "epochs_run": res.epochs_run,
            "curvatures": res.curvatures,
        }
        if res.test_accuracy is not None:
            entry["test_accuracy"] = res.test_accuracy
        per_seed.append(entry)

    values = np.array([r["test_metric"] for r in per_seed])
    if cfg.task == "lp":
        metric = "roc_auc"
    else:
        metric = "f1" if int(prep.graph.labels.max()) + 1 == 2 else "accuracy"
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "task": cfg.task,
        "model": cfg.model,
        "metric": metric,
        "graph": {"n": int(prep.graph.n), "m": int(prep.graph.m)},
        "seeds": per_seed,
        "mean": float(values.mean()),
        "std": float(values.std()),
        "config": config_to_dict(cfg),
    }
    (out_dir / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    timing = {
        "wall_clock_seconds": time.perf_counter() - started,
        "per_seed_seconds": {str(k): timings[k] for k in cfg.seeds},
        "threads": _threads(),
    }
    (out_dir / "timing.json").write_text(json.dumps(timing, indent=2, sort_keys=True) + "\n")
    return report


def cmd_train(args):
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run_training(cfg, config_dir=Path(args.config).resolve().parent)
    except train.TrainingError as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"metric": report["metric"], "mean": report["mean"], "std": report["std"]}))
    return 0


def cmd_hyperbolicity(args):
    try:
        n, edges = gdata.load_edges(args.edges)
    except (gdata.GraphFormatError, gdata.GraphValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    mode = "sampled" if args.samples is not None else "exact"
    try:
        delta, info = gdata.delta_hyperbolicity(
            n, edges, mode=mode, samples=args.samples or 0, seed=args.seed, return_info=True
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not info["connected"]:
        print(
            f"warning: graph is disconnected; delta computed on the largest component "
            f"({info['component_nodes']} of {n} nodes)",
            file=sys.stderr,
        )
    print(json.dumps({"n": n, "m": int(len(edges)), "delta": delta, "mode": mode}))
    return 0


def cmd_export(args):
    try:
        tensors, header = load_checkpoint(args.ckpt)
    except CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if header.get("model") != "hgcn" or "embeddings" not in tensors:
        print("error: export needs a checkpoint with hyperbolic (hgcn) embeddings", file=sys.stderr)
        return 2
    _write_embeddings(args.out, tensors["embeddings"], True, header["curvatures"][-1])
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="lorentz", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train models described by a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("hyperbolicity", help="Gromov delta of an edge-list graph")
    p.add_argument("--edges", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--exact", action="store_true", help="enumerate all 4-tuples (default)")
    group.add_argument("--samples", type=int, help="sample this many random 4-tuples")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_hyperbolicity)

    p = sub.add_parser("export", help="write Poincare-ball coordinates from a checkpoint")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
