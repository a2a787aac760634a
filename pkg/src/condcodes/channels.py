"""Binary channels, capacities and reproducible noise sampling.

Every random draw goes through :func:`rng_stream`, a Philox counter-based
generator keyed by ``(master seed, trial index)``, so a trial's transcript
depends only on those two numbers.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .probability import FiniteDistribution, binary_entropy, shannon_entropy

BEC = "bec"
BSC = "bsc"
ADDITIVE = "additive"


def rng_stream(master: int, trial: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(master), int(trial)])))


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Rows of 0/1 (little-endian) to ints."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.int64))
    weights = np.left_shift(np.int64(1), np.arange(bits.shape[1], dtype=np.int64))
    return bits @ weights


def bernoulli_masks(n: int, p: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` i.i.d. draws from ``B_{n,p}`` packed as ints."""
    if n > 62:
        raise ValueError("packed masks limited to n <= 62")
    return pack_bits(rng.random((count, n)) < p)


@dataclass(frozen=True)
class Channel:
    kind: str
    p: float = 0.0
    noise: FiniteDistribution | None = None

    def __post_init__(self):
        if self.kind not in (BEC, BSC, ADDITIVE):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.kind == ADDITIVE:
            if self.noise is None:
                raise ValueError("additive channel needs a noise distribution")
        elif not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")

    @classmethod
    def bec(cls, p: float) -> "Channel":
        return cls(BEC, p)

    @classmethod
    def bsc(cls, p: float) -> "Channel":
        return cls(BSC, p)

    @classmethod
    def additive(cls, noise: FiniteDistribution) -> "Channel":
        return cls(ADDITIVE, noise=noise)

    @property
    def block(self) -> int | None:
        return self.noise.n if self.noise is not None else None

    def to_json(self) -> str:
        obj = {"kind": self.kind, "p": self.p}
        if self.noise is not None:
            obj["noise"] = json.loads(self.noise.to_json())
        return json.dumps(obj)

    @classmethod
    def from_json(cls, text) -> "Channel":
        obj = json.loads(text) if isinstance(text, str) else text
        noise = FiniteDistribution.from_json(obj["noise"]) if obj.get("noise") else None
        return cls(obj["kind"], float(obj.get("p", 0.0)), noise)


def capacity(ch: Channel) -> float:
    """Bits per channel use."""
    if ch.kind == BEC:
        return 1.0 - ch.p
    if ch.kind == BSC:
        return 1.0 - binary_entropy(ch.p)
    return (ch.noise.n - shannon_entropy(ch.noise)) / ch.noise.n


@dataclass(frozen=True)
class Received:
    data: int
    erased: int = 0     # mask of erased positions (BEC only); data is 0 there


def transmit(ch: Channel, codeword: int, n: int, rng: np.random.Generator) -> Received:
    if ch.kind == ADDITIVE:
        if n != ch.noise.n:
            raise ValueError(f"block length {n} != noise length {ch.noise.n}")
        z = int(rng.choice(ch.noise.outcomes, p=ch.noise.probs))
        return Received(codeword ^ z)
    mask = int(bernoulli_masks(n, ch.p, 1, rng)[0])
    if ch.kind == BSC:
        return Received(codeword ^ mask)
    return Received(codeword & ~mask, mask)


# ---------------------------------------------------------------------------
# erasure patterns


def truncated_binomial_pmf(n: int, p: float, m: int) -> np.ndarray:
    """Weight law of ``B_{n,p}`` conditioned on weight ``<= m``."""
    pmf = stats.binom.pmf(np.arange(min(m, n) + 1), n, p)
    if pmf.sum() <= 0:
        raise ValueError(f"B_({n},{p}) puts no mass on weights <= {m}")
    return pmf / pmf.sum()


@dataclass(frozen=True)
class PatternDistribution:
    """Erasure-pattern law: ``B_{n,p}``, ``B_{n,p}`` given weight ``<= m``, or explicit."""

    n: int
    p: float = 0.5
    max_weight: int | None = None
    explicit: FiniteDistribution | None = None

    def sample(self, rng: np.random.Generator) -> int:
        if self.explicit is not None:
            return int(rng.choice(self.explicit.outcomes, p=self.explicit.probs))
        if self.max_weight is None:
            return int(bernoulli_masks(self.n, self.p, 1, rng)[0])
        pmf = truncated_binomial_pmf(self.n, self.p, self.max_weight)
        w = int(np.searchsorted(np.cumsum(pmf), rng.random(), side="right"))
        w = min(w, len(pmf) - 1)
        pos = rng.choice(self.n, size=w, replace=False)
        return int(sum(1 << int(j) for j in pos))

    def __call__(self, rng: np.random.Generator) -> int:
        return self.sample(rng)


def erasure_pattern_sample(dist: PatternDistribution, rng: np.random.Generator) -> frozenset[int]:
    """Erased positions as a set."""
    s = dist.sample(rng)
    return frozenset(j for j in range(dist.n) if (s >> j) & 1)
