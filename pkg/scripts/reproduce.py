"""Run the pipeline for every resampling method over several seeds and tabulate test metrics.

    python scripts/reproduce.py data/uci_credit_default.csv --seeds 0 1 2 --out runs/matrix
"""

import argparse
import csv
import json
import time
from pathlib import Path

from credit_default.config import MODEL_ORDER, PipelineConfig
from credit_default.pipeline import run_pipeline
from credit_default.resample import METHODS

METRICS = ("recall", "specificity", "f1", "g_mean", "roc_auc", "pr_auc")


def run_matrix(data, out, seeds=(0, 1, 2), methods=METHODS, models=MODEL_ORDER,
               boruta_max_iter=100, grid_search=False, threads=1, leakage_safe=False):
    out = Path(out)
    rows = []
    for seed in seeds:
        for method in methods:
            cfg = PipelineConfig(input=str(data), out=str(out / f"{method}_s{seed}"), resample=method,
                                 models=tuple(models), seed=seed, boruta_max_iter=boruta_max_iter,
                                 boruta_cache=str(out / "cache"), grid_search=grid_search,
                                 threads=threads, leakage_safe=leakage_safe)
            start = time.perf_counter()
            report = run_pipeline(cfg)
            print(f"seed {seed} {method}: {time.perf_counter() - start:.0f}s", flush=True)
            for name, m in report["models"].items():
                rows.append({"seed": seed, "method": method, "model": name,
                             **{k: m["test"][k] for k in METRICS}})
    with (out / "summary.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["seed", "method", "model", *METRICS], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("data")
    ap.add_argument("--out", default="runs/matrix")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--methods", nargs="+", default=list(METHODS), choices=METHODS)
    ap.add_argument("--models", nargs="+", default=list(MODEL_ORDER), choices=MODEL_ORDER)
    ap.add_argument("--boruta-max-iter", type=int, default=100)
    ap.add_argument("--grid-search", action="store_true")
    ap.add_argument("--leakage-safe", action="store_true")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    rows = run_matrix(args.data, args.out, args.seeds, args.methods, args.models, args.boruta_max_iter,
                      args.grid_search, args.threads, args.leakage_safe)
    means = {}
    for r in rows:
        means.setdefault((r["method"], r["model"]), []).append(r)
    for (method, model), rs in sorted(means.items()):
        avg = {k: sum(r[k] for r in rs) / len(rs) for k in METRICS}
        print(f"{method:12s} {model:12s} " + " ".join(f"{k}={v:.4f}" for k, v in avg.items()))
    print(json.dumps({"runs": len(rows)}))


if __name__ == "__main__":
    main()
