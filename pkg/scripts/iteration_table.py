"""FER and average-iteration comparison of flooding BP, random SVNS and the
learned schedule on one code under bit-flip noise.

The code is a registry name (steane, toric3, toric5, bb72, bb144, bb288) or a
pair of alist files for h_a and h_b. A binary table is trained first unless
one is supplied.

    python3 scripts/iteration_table.py --code toric5 --grid 0.02,0.04,0.06
    python3 scripts/iteration_table.py --alist-a hx.alist --alist-b hz.alist --frames 5000
"""

from __future__ import annotations

import argparse
import sys

from qrlbp.codes import CssCode, get_code, load_alist
from qrlbp.graph import build_adjacency
from qrlbp.harness import ExperimentSpec, run_grid
from qrlbp.rl import TrainConfig, load_qtable, save_qtable, train

DECODERS = ("bp", "svns", "rl-svns-fast", "bpgd", "rl-svns-gd")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--code")
    src.add_argument("--alist-a")
    ap.add_argument("--alist-b")
    ap.add_argument("--qtable")
    ap.add_argument("--episodes", type=int, default=100_000)
    ap.add_argument("--train-seed", type=int, default=0)
    ap.add_argument("--grid", default="0.02,0.03,0.04,0.05")
    ap.add_argument("--frames", type=int, default=10_000)
    ap.add_argument("--target-errors", type=int)
    ap.add_argument("--max-iters", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--qtable-out")
    args = ap.parse_args(argv)

    if args.code:
        code = get_code(args.code)
    else:
        if not args.alist_b:
            ap.error("--alist-a needs --alist-b")
        code = CssCode(load_alist(args.alist_a), load_alist(args.alist_b), "custom")
    print(f"# {code.name}: n={code.n} k={code.k}", file=sys.stderr)

    if args.qtable:
        q = load_qtable(args.qtable, "binary")
    else:
        q = train(code, build_adjacency(code.h_a), TrainConfig(episodes=args.episodes, seed=args.train_seed))
        if args.qtable_out:
            save_qtable(q, args.qtable_out)

    grid = tuple(float(p) for p in args.grid.split(","))
    rows = {}
    for name in DECODERS:
        spec = ExperimentSpec(
            code, name, grid, frames=args.frames, target_errors=args.target_errors, seed=args.seed,
            max_iters=args.max_iters, qtable=q, threads=args.threads,
        )
        rows[name] = run_grid(spec)

    head = f"{'p':>7} " + " ".join(f"{n:>24}" for n in DECODERS)
    print(head)
    print(f"{'':>7} " + " ".join(f"{'fer / avg iters':>24}" for _ in DECODERS))
    for idx, p in enumerate(sorted(set(grid))):
        cells = []
        for name in DECODERS:
            s = rows[name][idx]
            cells.append(f"{s.fer:>12.3e} / {s.avg_iters:>8.2f}")
        print(f"{p:>7g} " + " ".join(f"{c:>24}" for c in cells))
    return 0


if __name__ == "__main__":
    sys.exit(main())
