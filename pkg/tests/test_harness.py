from __future__ import annotations

import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrlbp.codes import Outcome, steane_code, toric_code
from qrlbp.graph import build_adjacency
from qrlbp.harness import (
    CSV_COLUMNS,
    ExperimentSpec,
    csv_rows,
    run_grid,
    run_point,
    run_trials,
    summarize,
    wilson,
)
from qrlbp.quaternary import quat_qtable
from qrlbp.rl import binary_qtable

TORIC3 = toric_code(3)


def spec(**kw) -> ExperimentSpec:
    base = dict(code=TORIC3, decoder="bp", grid=(0.05,), frames=200, seed=3, max_iters=20)
    base.update(kw)
    return ExperimentSpec(**base)


def test_wilson_reference_values():
    # closed forms: k = 0 gives upper z^2 / (n + z^2); k = n / 2 is symmetric about 1/2
    z2 = 1.959963984540054**2
    lo, hi = wilson(0, 10)
    assert lo == 0.0 and hi == pytest.approx(z2 / (10 + z2), abs=1e-12)
    lo, hi = wilson(5, 10)
    assert lo + hi == pytest.approx(1.0, abs=1e-12)
    assert lo == pytest.approx(0.2365931, abs=1e-6)
    assert wilson(0, 0) == (0.0, 1.0)


@given(st.integers(1, 5000), st.data())
def test_wilson_contains_estimate(n, data):
    k = data.draw(st.integers(0, n))
    lo, hi = wilson(k, n)
    assert 0.0 <= lo <= k / n <= hi <= 1.0


def test_spec_validation():
    with pytest.raises(ValueError):
        spec(decoder="osd")
    with pytest.raises(ValueError):
        spec(decoder="rl-svns")
    with pytest.raises(ValueError):
        spec(decoder="rl-svns", qtable=quat_qtable(build_adjacency(TORIC3.h_a), build_adjacency(TORIC3.h_b)))
    with pytest.raises(ValueError):
        spec(decoder="rl-svns", qtable=binary_qtable(build_adjacency(steane_code().h_a)))
    with pytest.raises(ValueError):
        spec(grid=(0.5,))
    with pytest.raises(ValueError):
        spec(frames=0)
    # depolarizing points may go past 0.5
    spec(decoder="qbp", grid=(0.6,), frames=1)


def test_zero_noise_never_fails():
    for name in ("bp", "svns", "bpgd", "qbp", "qsvns", "qbpgd"):
        s = run_point(spec(decoder=name, grid=(0.0,), frames=50), 0.0)
        assert (s.fer, s.errors, s.avg_iters) == (0.0, 0, 0.0)
        if name.endswith("gd"):
            assert s.avg_decimations == 1.0


def test_all_nonconvergent_summary():
    recs = [(Outcome.NONCONVERGENCE, 20, 0)] * 12
    s = summarize(0.1, recs, gd=False)
    assert s.fer == 1.0 and s.pct_nonconvergence == 100.0 and s.logical_errors == 0
    assert s.reconciles() and s.converged_ok == 0


@pytest.mark.parametrize("decoder", ["bp", "svns", "qbp", "qsvns", "bpgd"])
def test_determinism_and_reconciliation(decoder):
    a = run_point(spec(decoder=decoder, grid=(0.08,)), 0.08)
    b = run_point(spec(decoder=decoder, grid=(0.08,)), 0.08)
    assert a == b
    assert a.reconciles()
    assert a.converged_ok + a.logical_errors + a.nonconv == a.frames


def test_trials_do_not_depend_on_chunking_or_workers():
    base = run_trials(spec(decoder="svns", frames=120), 0.1)
    for chunk, threads in ((7, 1), (50, 2), (256, 3)):
        s = spec(decoder="svns", frames=120, chunk=chunk, threads=threads)
        assert run_trials(s, 0.1) == base


def test_target_errors_truncates_at_nth_failure():
    full = run_trials(spec(frames=400), 0.12)
    fails = [i for i, r in enumerate(full) if r[0] is not Outcome.CONVERGED]
    assert len(fails) > 5
    for chunk, threads in ((3, 1), (64, 2)):
        cut = run_trials(spec(frames=400, target_errors=5, chunk=chunk, threads=threads), 0.12)
        assert cut == full[: fails[4] + 1]
    # never reached: all frames run
    assert run_trials(spec(frames=400, target_errors=10_000, chunk=16), 0.12) == full


def test_csv_two_points(tmp_path):
    s = spec(decoder="bpgd", grid=(0.1, 0.02, 0.1), frames=60)
    out = tmp_path / "r.csv"
    points = run_grid(s, out, log=None)
    assert [p.p for p in points] == [0.02, 0.1]
    lines = out.read_text().splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 3
    row = dict(zip(CSV_COLUMNS, lines[2].split(",")))
    assert row["code"] == "toric3" and row["decoder"] == "bpgd" and row["p"] == "0.1"
    assert int(row["errors"]) == int(row["logical_errors"]) + int(row["nonconv"])
    assert float(row["avg_decimations"]) >= 1
    plain = csv_rows(spec(frames=10), [run_point(spec(frames=10), 0.05)])
    assert plain.splitlines()[1].endswith(",")  # no decimations column value


def test_empty_grid():
    with pytest.raises(ValueError):
        run_grid(spec(grid=()), log=None)


def test_threads_give_identical_csv():
    one = csv_rows(spec(), run_grid(spec(grid=(0.03, 0.09)), log=None))
    two = csv_rows(spec(), run_grid(spec(grid=(0.03, 0.09), threads=2, chunk=16), log=None))
    assert one == two


def test_qtable_decoders_run():
    adj_a, adj_b = build_adjacency(TORIC3.h_a), build_adjacency(TORIC3.h_b)
    qb, qq = binary_qtable(adj_a), quat_qtable(adj_a, adj_b)
    ref = run_point(spec(decoder="rl-svns", qtable=qb), 0.05)
    fast = run_point(spec(decoder="rl-svns-fast", qtable=qb), 0.05)
    assert dataclasses.replace(ref, outcomes=[]) == dataclasses.replace(fast, outcomes=[])
    ref = run_point(spec(decoder="rl-qsvns", qtable=qq), 0.05)
    fast = run_point(spec(decoder="rl-qsvns-fast", qtable=qq), 0.05)
    assert ref == fast
    gd = run_point(spec(decoder="rl-qsvns-gd", qtable=qq, frames=50), 0.1)
    assert gd.reconciles() and gd.avg_decimations >= 1
