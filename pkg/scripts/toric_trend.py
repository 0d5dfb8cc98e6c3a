"""Train a two-stream schedule on a toric code and compare it with random and
flooding schedules under depolarizing noise.

    python3 scripts/toric_trend.py --distance 3 --episodes 100000 --frames 20000
"""

from __future__ import annotations

import argparse
import sys
import time

from qrlbp.codes import toric_code
from qrlbp.graph import build_adjacency
from qrlbp.harness import ExperimentSpec, csv_rows, run_grid
from qrlbp.quaternary import train_quat
from qrlbp.rl import TrainConfig, save_qtable


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--distance", type=int, default=3)
    ap.add_argument("--episodes", type=int, default=100_000)
    ap.add_argument("--train-seed", type=int, default=2024)
    ap.add_argument("--grid", default="0.02,0.04,0.05,0.06,0.08")
    ap.add_argument("--frames", type=int, default=20_000)
    ap.add_argument("--max-iters", type=int, default=12)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--qtable-out")
    args = ap.parse_args(argv)

    code = toric_code(args.distance)
    adj_x, adj_z = build_adjacency(code.h_a), build_adjacency(code.h_b)
    t0 = time.perf_counter()
    q = train_quat(code, adj_x, adj_z, TrainConfig(episodes=args.episodes, seed=args.train_seed))
    print(f"# trained {len(q)} entries in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    if args.qtable_out:
        save_qtable(q, args.qtable_out)

    grid = tuple(float(p) for p in args.grid.split(","))
    first = True
    for name in ("rl-qsvns-fast", "qsvns", "qbp"):
        spec = ExperimentSpec(
            code, name, grid, frames=args.frames, seed=args.seed, max_iters=args.max_iters,
            qtable=q, threads=args.threads,
        )
        text = csv_rows(spec, run_grid(spec))
        sys.stdout.write(text if first else text.split("\n", 1)[1])
        first = False
    return 0


if __name__ == "__main__":
    sys.exit(main())
