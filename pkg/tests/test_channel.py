from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrlbp.channel import (
    L_MAX,
    NoiseParams,
    PauliFrame,
    llr,
    prior_llr,
    sample_bitflip,
    sample_depolarizing,
    syndrome,
    trial_rng,
)
from qrlbp.gf2 import BitVec, mat_vec_mul


def within_3_sigma(count: int, n: int, p: float) -> bool:
    return abs(count - n * p) <= 3 * math.sqrt(n * p * (1 - p))


def test_bitflip_zero_and_determinism():
    assert sample_bitflip(100, 0.0, 1) == BitVec.zeros(100)
    assert sample_bitflip(500, 0.1, 9) == sample_bitflip(500, 0.1, 9)
    assert sample_bitflip(500, 0.1, 9) != sample_bitflip(500, 0.1, 10)


def test_bitflip_rate():
    n = 10**6
    assert within_3_sigma(sample_bitflip(n, 0.05, 123).weight, n, 0.05)


def test_depolarizing_rates():
    n = 10**6
    f = sample_depolarizing(n, 0.06, 321)
    a, b = f.e_a.to_array(), f.e_b.to_array()
    assert within_3_sigma(int(a.sum()), n, 0.04)
    assert within_3_sigma(int(b.sum()), n, 0.04)
    assert within_3_sigma(int((a & b).sum()), n, 0.02)


def test_depolarizing_zero():
    f = sample_depolarizing(50, 0.0, 0)
    assert not f.e_a.any() and not f.e_b.any()


def test_priors():
    assert llr(0.5) == 0.0
    assert prior_llr(NoiseParams.bitflip(0.05)) == pytest.approx(2.9444, abs=1e-4)
    assert prior_llr(NoiseParams.depolarizing(0.06)) == pytest.approx(3.1781, abs=1e-4)
    assert prior_llr(NoiseParams.bitflip(0.0)) == L_MAX


def test_noise_param_ranges():
    with pytest.raises(ValueError):
        NoiseParams.bitflip(0.5)
    with pytest.raises(ValueError):
        NoiseParams.depolarizing(0.75)
    with pytest.raises(ValueError):
        sample_bitflip(3, 0.6, 0)


def test_trial_streams_independent_of_order():
    first = [trial_rng(7, t).random() for t in range(5)]
    second = [trial_rng(7, t).random() for t in reversed(range(5))][::-1]
    assert first == second
    assert len(set(first)) == 5


def test_syndrome_basics(steane):
    z = PauliFrame(BitVec.zeros(7), BitVec.zeros(7))
    assert syndrome(steane, z) == (BitVec.zeros(3), BitVec.zeros(3))
    for i in range(7):
        (s,) = syndrome(steane, PauliFrame(BitVec.unit(7, i)))
        assert s == steane.h_a.column(i)
    with pytest.raises(ValueError):
        syndrome(steane, PauliFrame(BitVec.zeros(6)))


@given(st.integers(0, 2**18 - 1), st.integers(0, 2**18 - 1))
def test_syndrome_linearity_and_loop_oracle(x, y):
    from qrlbp.codes import toric_code

    code = toric_code(3)
    e1, e2 = BitVec(x, 18), BitVec(y, 18)
    (s1,), (s2,) = syndrome(code, PauliFrame(e1)), syndrome(code, PauliFrame(e2))
    (s12,) = syndrome(code, PauliFrame(e1 ^ e2))
    assert s12 == s1 ^ s2
    h = code.h_a.to_array()
    loop = [sum(int(h[j, i]) * e1[i] for i in range(18)) % 2 for j in range(h.shape[0])]
    assert s1.to_list() == loop
    assert mat_vec_mul(code.h_a, e1) == s1
