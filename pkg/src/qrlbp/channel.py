"""Seeded noise sampling, syndromes and channel priors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .codes import CssCode
from .gf2 import BitVec, mat_vec_mul

# Shared with the decoders: message magnitude cap in LLR units.
L_MAX = 30.0


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent counter-based stream for Monte Carlo trial ``trial``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial,))
    return np.random.Generator(np.random.Philox(ss))


def as_rng(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(rng)))


@dataclass(frozen=True)
class NoiseParams:
    kind: Literal["bitflip", "depolarizing"]
    p: float

    def __post_init__(self):
        if self.kind == "bitflip":
            if not 0 <= self.p < 0.5:
                raise ValueError(f"bit-flip probability must lie in [0, 0.5), got {self.p}")
        elif self.kind == "depolarizing":
            if not 0 <= self.p < 0.75:
                raise ValueError(f"depolarizing p must lie in [0, 0.75), got {self.p}")
        else:
            raise ValueError(f"unknown channel kind {self.kind!r}")

    @classmethod
    def bitflip(cls, p: float) -> NoiseParams:
        return cls("bitflip", p)

    @classmethod
    def depolarizing(cls, p: float) -> NoiseParams:
        return cls("depolarizing", p)


@dataclass(frozen=True)
class PauliFrame:
    """Binary components of a Pauli error.

    ``e_a`` enters ``h_a @ e``; ``e_b`` enters ``h_b @ e`` and is ``None``
    for the bit-flip channel.
    """

    e_a: BitVec
    e_b: BitVec | None = None


def sample_bitflip(n: int, p_x: float, rng: np.random.Generator | int | None) -> BitVec:
    if not 0 <= p_x < 0.5:
        raise ValueError(f"p_x must lie in [0, 0.5), got {p_x}")
    rng = as_rng(rng)
    return BitVec.from_array(rng.random(n) < p_x)


def sample_depolarizing(n: int, p: float, rng: np.random.Generator | int | None) -> PauliFrame:
    """I with probability ``1 - p``, otherwise X, Y, Z with ``p/3`` each.

    Stream a carries Z and Y, stream b carries X and Y.
    """
    if not 0 <= p < 0.75:
        raise ValueError(f"p must lie in [0, 0.75), got {p}")
    rng = as_rng(rng)
    u = rng.random(n)
    is_x = u < p / 3
    is_y = (u >= p / 3) & (u < 2 * p / 3)
    is_z = (u >= 2 * p / 3) & (u < p)
    return PauliFrame(BitVec.from_array(is_z | is_y), BitVec.from_array(is_x | is_y))


def sample(params: NoiseParams, n: int, rng) -> PauliFrame:
    if params.kind == "bitflip":
        return PauliFrame(sample_bitflip(n, params.p, rng))
    return sample_depolarizing(n, params.p, rng)


def llr(q: float) -> float:
    """``log((1 - q) / q)`` with ``q == 0`` mapped to ``+L_MAX``."""
    if q <= 0:
        return L_MAX
    return math.log((1 - q) / q)


def prior_llr(params: NoiseParams) -> float:
    """Prior LLR; for depolarizing noise the shared value of both streams.

    A probability of exactly zero maps to ``+L_MAX``.
    """
    if params.kind == "bitflip":
        return llr(params.p)
    return llr(2 * params.p / 3)


def syndrome(code: CssCode, frame: PauliFrame) -> tuple[BitVec, ...]:
    s_a = mat_vec_mul(code.h_a, frame.e_a)
    if frame.e_b is None:
        return (s_a,)
    return (s_a, mat_vec_mul(code.h_b, frame.e_b))
