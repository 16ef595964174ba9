"""Time the hot kernels under the numba and the numpy backend.

The backend is fixed at import time, so each one runs in its own process:

    python3 benchmarks/bench_kernels.py            # both, side by side
    python3 benchmarks/bench_kernels.py --worker   # current backend only, JSON out
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _best(fn, repeat):
    fn()  # warm-up (numba compiles or loads its cache here)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def worker(scale: float, repeat: int) -> dict:
    from polilean._accel import BACKEND
    from polilean.classify import Dataset, train
    from polilean.dimred import joint_probabilities, kl_gradient
    from polilean.layout import attraction, repulsion_barnes_hut, repulsion_exact
    from polilean.relational import RelationalConfig, train_relational_tables
    from polilean.synth import RegionSpec, SynthConfig, generate
    from polilean.walks import SkipGramConfig, WalkConfig, generate_walks, train_skipgram

    r = np.random.default_rng(0)
    # sizes keep the interpreted backend to seconds per case at scale 1
    n_int = int(300 * scale)
    spec = RegionSpec("B", ["A", "B", "C"], members_per_party=20, supporters_per_party=20,
                      sympathizers_per_party=20, interacting_users=n_int)
    g = generate(SynthConfig([spec], retweets_per_user=8.0, seed=1))[0].graph
    walk_cfg = WalkConfig(walks_per_node=1, walk_length=20, window=5, q=0.5)
    corpus = generate_walks(g, walk_cfg)
    src, dst = g.pair_arrays()
    n_pts = int(200 * scale)
    pos, mass = r.normal(size=(n_pts, 2)), r.integers(1, 5, n_pts).astype(float)
    adj = g.undirected()
    rows = np.repeat(np.arange(adj.n_nodes), adj.degree())
    Y0 = r.normal(size=(200, 2))
    P = joint_probabilities(r.normal(size=(200, 10)), 30.0)
    X, y = r.normal(size=(int(200 * scale), 5)), r.integers(0, 4, int(200 * scale))
    cases = {
        "node2vec walks": lambda: generate_walks(g, walk_cfg),
        "skip-gram epoch": lambda: train_skipgram(corpus, SkipGramConfig(dim=20)),
        "relational epoch": lambda: train_relational_tables(src, dst, g.n_users, RelationalConfig(epochs=1)),
        "fa2 repulsion exact": lambda: repulsion_exact(pos, mass, 2.0, np.zeros_like(pos)),
        "fa2 repulsion barnes-hut": lambda: repulsion_barnes_hut(pos, mass, 2.0, 1.2, np.zeros_like(pos)),
        "fa2 attraction": lambda: attraction(r.normal(size=(adj.n_nodes, 2)), rows, adj.indices,
                                             adj.weights, False, np.zeros((adj.n_nodes, 2))),
        "t-SNE gradient": lambda: kl_gradient(P, Y0),
        "random forest (10 trees)": lambda: train("rf", Dataset(X, y), trees=10),
        "linear SVM": lambda: train("linsvm", Dataset(X, y)),
    }
    return {"backend": BACKEND, "times": {k: _best(f, repeat) for k, f in cases.items()}}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--worker", action="store_true")
    ap.add_argument("--scale", type=float, default=1.0, help="problem size multiplier")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if args.worker:
        print(json.dumps(worker(args.scale, args.repeat)))
        return
    results = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, POLILEAN_BACKEND=backend, POLILEAN_THREADS="1")
        cmd = [sys.executable, __file__, "--worker", "--scale", str(args.scale), "--repeat", str(args.repeat)]
        out = subprocess.run(cmd, env=env, check=True, capture_output=True, text=True).stdout
        results[backend] = json.loads(out.strip().splitlines()[-1])["times"]
    width = max(map(len, results["numba"]))
    print(f"{'kernel':<{width}}  {'numba s':>10}  {'numpy s':>10}  {'speed-up':>8}")
    for name, t_nb in results["numba"].items():
        t_np = results["numpy"][name]
        print(f"{name:<{width}}  {t_nb:10.4f}  {t_np:10.4f}  {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
