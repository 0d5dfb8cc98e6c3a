"""Command-line entry point: ``qrlbp {gen-code,train,eval,decode,inspect-qtable}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bp import BpConfig, decode_flooding, decode_svns, random_schedule
from .channel import as_rng, llr
from .codes import REGISTRY, CssCode, build_bb_code, get_code, load_alist, save_alist
from .decimation import GdConfig, decode_gd, decode_quat_gd
from .fast import decode_fast, decode_quat_fast
from .gf2 import BitVec
from .graph import build_adjacency
from .harness import DECODERS, ExperimentSpec, csv_rows, is_quaternary, needs_qtable, run_grid
from .quaternary import DepolPrior, decode_quat, train_quat
from .rl import TrainConfig, TrainStats, greedy_schedule, load_qtable, save_qtable, train

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def write_code_dir(code: CssCode, out: Path) -> str:
    out.mkdir(parents=True, exist_ok=True)
    save_alist(code.h_a, out / "h_a.alist")
    save_alist(code.h_b, out / "h_b.alist")
    line = f"name={code.name} n={code.n} k={code.k} m_a={code.h_a.shape[0]} m_b={code.h_b.shape[0]}"
    (out / "manifest.txt").write_text(line + "\n")
    return line


def resolve_code(ref: str) -> CssCode:
    """A registry name, a directory written by gen-code, or its manifest."""
    if ref in REGISTRY:
        return get_code(ref)
    path = Path(ref)
    if path.is_file() and path.name == "manifest.txt":
        path = path.parent
    if not path.is_dir():
        raise UsageError(f"--code {ref!r} is neither a known code ({', '.join(REGISTRY)}) nor a code directory")
    fields = {}
    manifest = path / "manifest.txt"
    if manifest.exists():
        for tok in manifest.read_text().split():
            key, _, val = tok.partition("=")
            fields[key] = val
    try:
        code = CssCode(load_alist(path / "h_a.alist"), load_alist(path / "h_b.alist"), fields.get("name", path.name))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if "n" in fields and int(fields["n"]) != code.n:
        raise UsageError(f"manifest says n={fields['n']} but matrices have n={code.n}")
    return code


def parse_grid(text: str) -> tuple[float, ...]:
    try:
        grid = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"bad probability list {text!r}") from None
    if not grid:
        raise UsageError("empty probability list")
    return grid


def parse_syndrome(text: str, length: int) -> BitVec:
    """Bitstring ``0101...`` or ``<len>:<hex>`` (the hex spells the same bitstring)."""
    text = text.strip()
    if ":" in text:
        head, _, digits = text.partition(":")
        try:
            n = int(head)
            value = int(digits, 16)
        except ValueError:
            raise UsageError(f"malformed hex syndrome {text!r}") from None
        if n < 0 or value >> n:
            raise UsageError(f"hex syndrome {text!r} does not fit in {n} bits")
        bits = format(value, f"0{n}b") if n else ""
    else:
        bits = text
    if any(c not in "01" for c in bits):
        raise UsageError(f"malformed syndrome {text!r}")
    if len(bits) != length:
        raise UsageError(f"syndrome has length {len(bits)}, expected {length}")
    return BitVec.from_str(bits)


def echo_config(command: str, cfg: dict) -> None:
    print(f"[config] {command} " + json.dumps(cfg, sort_keys=True, default=str), file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_code(args) -> int:
    sources = [args.bb is not None, args.toy is not None, args.alist_a is not None or args.alist_b is not None]
    if sum(sources) != 1:
        raise UsageError("select exactly one of --bb, --toy, --alist-a/--alist-b")
    echo_config("gen-code", vars(args) | {"func": None})
    try:
        if args.bb is not None:
            l, m, pa, pb = args.bb
            code = build_bb_code(int(l), int(m), pa, pb, args.name or f"bb_{l}_{m}")
        elif args.toy is not None:
            code = get_code(args.toy)
        else:
            if args.alist_a is None or args.alist_b is None:
                raise UsageError("--alist-a and --alist-b must be given together")
            code = CssCode(load_alist(args.alist_a), load_alist(args.alist_b), args.name or "custom")
    except KeyError as exc:
        raise UsageError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    line = write_code_dir(code, Path(args.out))
    print(line)
    return EXIT_OK


def cmd_train(args) -> int:
    code = resolve_code(args.code)
    grid = parse_grid(args.grid)
    limit = 0.75 if args.channel == "depolarizing" else 0.5
    if any(not 0 < p < limit for p in grid):
        raise UsageError(f"grid values must lie in (0, {limit}) for the {args.channel} channel")
    try:
        cfg = TrainConfig(
            episodes=args.episodes, grid=grid, alpha=args.alpha, gamma=args.gamma,
            eps0=args.eps0, eps_min=args.epsmin, max_iters=args.max_iters, seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    echo_config("train", {"code": code.name, "n": code.n, "channel": args.channel, "out": args.out, **cfg.__dict__})

    def progress(stats: TrainStats) -> None:
        ep, frac = stats.history[-1]
        print(f"episode {ep} solved_fraction {frac:.3f}", flush=True)

    stats = TrainStats()
    if args.channel == "depolarizing":
        q = train_quat(code, build_adjacency(code.h_a), build_adjacency(code.h_b), cfg, progress, stats)
    else:
        q = train(code, build_adjacency(code.h_a), cfg, progress, stats)
    save_qtable(q, args.out)
    print(f"wrote {len(q)} entries to {args.out}")
    return EXIT_OK


def _load_table_for(decoder: str, path):
    if needs_qtable(decoder):
        if path is None:
            raise UsageError(f"decoder {decoder} needs --qtable")
        variant = "quat" if is_quaternary(decoder) else "binary"
        return load_qtable(path, variant)
    return None


def cmd_eval(args) -> int:
    code = resolve_code(args.code)
    grid = parse_grid(args.p_grid)
    q = _load_table_for(args.decoder, args.qtable)
    try:
        spec = ExperimentSpec(
            code, args.decoder, grid, frames=args.frames, target_errors=args.target_errors,
            seed=args.seed, max_iters=args.max_iters, qtable=q, threads=args.threads,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    echo_config("eval", {
        "code": code.name, "decoder": args.decoder, "grid": list(spec.grid), "frames": spec.frames,
        "target_errors": spec.target_errors, "seed": spec.seed, "max_iters": spec.max_iters,
        "qtable": args.qtable, "threads": spec.threads, "out": args.out,
    })
    points = run_grid(spec, args.out)
    if args.out is None:
        sys.stdout.write(csv_rows(spec, points))
    return EXIT_OK


def cmd_decode(args) -> int:
    code = resolve_code(args.code)
    q = _load_table_for(args.decoder, args.qtable)
    quat = is_quaternary(args.decoder)
    if args.syndrome is None:
        raise UsageError("--syndrome is required")
    s_a = parse_syndrome(args.syndrome, code.h_a.shape[0])
    if quat:
        if args.syndrome_b is None:
            raise UsageError(f"decoder {args.decoder} needs --syndrome-b for the second stream")
        s_b = parse_syndrome(args.syndrome_b, code.h_b.shape[0])
    limit = 0.75 if quat else 0.5
    if not 0 < args.p < limit:
        raise UsageError(f"--p must lie in (0, {limit})")
    echo_config("decode", {
        "code": code.name, "decoder": args.decoder, "qtable": args.qtable, "p": args.p,
        "max_iters": args.max_iters, "seed": args.seed, "syndrome": str(s_a),
        "syndrome_b": str(s_b) if quat else None,
    })
    cfg = BpConfig(args.max_iters)
    gd_cfg = GdConfig(args.max_iters, "greedy" if needs_qtable(args.decoder) else "flooding")
    rng = as_rng(args.seed)
    trace: list = []
    adj_a = build_adjacency(code.h_a)
    dec = None
    name = args.decoder
    if quat:
        adj_b = build_adjacency(code.h_b)
        prior = DepolPrior.from_p(args.p)
        syn = (s_a, s_b)
        if name.endswith("gd"):
            r = decode_quat_gd(adj_a, adj_b, syn, prior, gd_cfg, q)
            dec = r.decimations
        elif name == "rl-qsvns-fast":
            r = decode_quat_fast(adj_a, adj_b, q, syn, prior, cfg, trace)
        else:
            mode = {"qbp": "flooding", "qsvns": "random", "rl-qsvns": "greedy"}[name]
            r = decode_quat(adj_a, adj_b, syn, prior, cfg, mode, q=q, rng=rng, trace=trace)
        est = " ".join(str(BitVec.from_array(e)) for e in r.e_hat)
    else:
        mu = llr(args.p)
        if name == "bp":
            r = decode_flooding(adj_a, s_a, mu, cfg)
        elif name == "svns":
            r = decode_svns(adj_a, s_a, mu, cfg, random_schedule(rng), trace)
        elif name == "rl-svns":
            r = decode_svns(adj_a, s_a, mu, cfg, greedy_schedule(q), trace)
        elif name == "rl-svns-fast":
            r = decode_fast(adj_a, q, s_a, mu, cfg, trace)
        else:
            r = decode_gd(adj_a, s_a, mu, gd_cfg, q)
            dec = r.decimations
        est = str(BitVec.from_array(r.e_hat))
    print(f"estimate {est}")
    print(f"converged {str(r.converged).lower()}")
    print(f"iterations {r.iterations}")
    if dec is not None:
        print(f"decimations {dec}")
    if args.verbose and trace:
        print("actions " + " ".join(str(a) for a, _, _ in trace))
        print("flips " + " ".join(str(int(f if isinstance(f, bool) else any(f))) for _, f, _ in trace))
        print("w " + " ".join(str(w) for _, _, w in trace))
    return EXIT_OK


def cmd_inspect_qtable(args) -> int:
    echo_config("inspect-qtable", {"qtable": args.qtable, "top": args.top})
    q = load_qtable(args.qtable)
    width = max(1, (q.s_max - 1).bit_length())
    print(f"variant {q.variant}")
    print(f"s_max {q.s_max}")
    print(f"n {q.n}")
    print(f"{len(q)} entries")
    for s, i, v in q.top(args.top):
        print(f"{s:0{width}b} {i} {v:.17g}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qrlbp", description="RL-scheduled sequential BP decoding for CSS codes")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-code", help="build or ingest a CSS code and write it as alist files")
    g.add_argument("--bb", nargs=4, metavar=("L", "M", "POLY_A", "POLY_B"))
    g.add_argument("--toy", choices=sorted(REGISTRY))
    g.add_argument("--alist-a")
    g.add_argument("--alist-b")
    g.add_argument("--name")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_code)

    t = sub.add_parser("train", help="learn a Q-table for the variable-node schedule")
    t.add_argument("--code", required=True)
    t.add_argument("--channel", choices=("bitflip", "depolarizing"), default="bitflip")
    t.add_argument("--episodes", type=int, default=100_000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--grid", default="0.03,0.04,0.05,0.06,0.07")
    t.add_argument("--alpha", type=float, default=0.1)
    t.add_argument("--gamma", type=float, default=0.9)
    t.add_argument("--eps0", type=float, default=0.6)
    t.add_argument("--epsmin", type=float, default=0.05)
    t.add_argument("--max-iters", type=int, default=100)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="Monte Carlo frame error rate over a noise grid")
    e.add_argument("--code", required=True)
    e.add_argument("--decoder", choices=DECODERS, required=True)
    e.add_argument("--qtable")
    e.add_argument("--p-grid", required=True)
    e.add_argument("--frames", type=int, default=1000)
    e.add_argument("--target-errors", type=int)
    e.add_argument("--max-iters", type=int, default=100)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--threads", type=int, default=1)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    d = sub.add_parser("decode", help="decode a single syndrome")
    d.add_argument("--code", required=True)
    d.add_argument("--decoder", choices=DECODERS, required=True)
    d.add_argument("--qtable")
    d.add_argument("--syndrome")
    d.add_argument("--syndrome-b")
    d.add_argument("--p", type=float, default=0.05, help="channel parameter used for the priors")
    d.add_argument("--max-iters", type=int, default=100)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--verbose", action="store_true")
    d.set_defaults(func=cmd_decode)

    i = sub.add_parser("inspect-qtable", help="summarise a Q-table file")
    i.add_argument("--qtable", required=True)
    i.add_argument("--top", type=int, default=10)
    i.set_defaults(func=cmd_inspect_qtable)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
