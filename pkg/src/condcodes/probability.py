"""Exact probability utilities over small spaces of bit vectors.

Outcomes are ints in ``[0, 2**n)``.  Distributions keep their support as a
sorted outcome array with matching probabilities, which covers both the
dense case (every outcome listed) and the sparse one.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

TOL = 1e-12
EXACT_MAX_BITS = 24


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    n: int
    outcomes: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        outcomes = np.asarray(self.outcomes, dtype=np.int64)
        probs = np.asarray(self.probs, dtype=np.float64)
        if outcomes.shape != probs.shape or outcomes.ndim != 1:
            raise ValueError("outcomes and probabilities must be matching 1-d arrays")
        if np.any(probs < 0):
            raise ValueError("negative probability")
        if abs(probs.sum() - 1.0) > TOL * max(1, len(probs)):
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        if len(outcomes) and (outcomes.min() < 0 or outcomes.max() >= (1 << self.n)):
            raise ValueError("outcome outside F_2^n")
        keep = probs > 0
        outcomes, probs = outcomes[keep], probs[keep]
        order = np.argsort(outcomes, kind="stable")
        outcomes, probs = outcomes[order], probs[order]
        if len(outcomes) > 1 and np.any(np.diff(outcomes) == 0):
            raise ValueError("duplicate outcomes")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_counts(cls, n: int, outcomes, weights=None) -> "FiniteDistribution":
        """Normalise (possibly repeated) outcomes with optional weights."""
        outcomes = np.asarray(outcomes, dtype=np.int64)
        w = np.ones(len(outcomes)) if weights is None else np.asarray(weights, dtype=np.float64)
        uniq, inv = np.unique(outcomes, return_inverse=True)
        mass = np.bincount(inv, weights=w, minlength=len(uniq))
        return cls(n, uniq, mass / mass.sum())

    @classmethod
    def from_dict(cls, n: int, mapping: dict[int, float]) -> "FiniteDistribution":
        keys = list(mapping)
        return cls(n, np.array(keys, dtype=np.int64), np.array([mapping[k] for k in keys]))

    @property
    def support(self) -> np.ndarray:
        return self.outcomes

    def prob(self, x: int) -> float:
        i = np.searchsorted(self.outcomes, x)
        if i < len(self.outcomes) and self.outcomes[i] == x:
            return float(self.probs[i])
        return 0.0

    def as_dict(self) -> dict[int, float]:
        return {int(x): float(p) for x, p in zip(self.outcomes, self.probs)}

    def to_dense(self) -> np.ndarray:
        if self.n > EXACT_MAX_BITS:
            raise ValueError(f"dense vectors limited to n <= {EXACT_MAX_BITS}")
        out = np.zeros(1 << self.n)
        out[self.outcomes] = self.probs
        return out

    def is_flat(self) -> bool:
        return bool(np.allclose(self.probs, self.probs[0], rtol=0, atol=TOL))

    def map(self, f: Callable[[int], int], n_out: int) -> "FiniteDistribution":
        return FiniteDistribution.from_counts(n_out, [f(int(x)) for x in self.outcomes], self.probs)

    def to_json(self) -> str:
        entries = [[format(int(x), "x"), float(p)] for x, p in zip(self.outcomes, self.probs)]
        return json.dumps({"n": self.n, "entries": entries})

    @classmethod
    def from_json(cls, text: str | dict) -> "FiniteDistribution":
        obj = json.loads(text) if isinstance(text, str) else text
        entries = obj["entries"]
        return cls(
            int(obj["n"]),
            np.array([int(h, 16) for h, _ in entries], dtype=np.int64),
            np.array([float(p) for _, p in entries]),
        )

    def __repr__(self) -> str:
        return f"FiniteDistribution(n={self.n}, support={len(self.outcomes)})"


class FlatDistribution(FiniteDistribution):
    """Uniform distribution on an explicit support."""

    def __init__(self, n: int, support: Iterable[int]):
        sup = np.unique(np.fromiter((int(s) for s in support), dtype=np.int64))
        if len(sup) == 0:
            raise ValueError("empty support")
        super().__init__(n, sup, np.full(len(sup), 1.0 / len(sup)))

    @property
    def size(self) -> int:
        return len(self.outcomes)


def uniform(n: int) -> FlatDistribution:
    return FlatDistribution(n, range(1 << n))


def point_mass(n: int, x: int = 0) -> FlatDistribution:
    return FlatDistribution(n, [x])


def bernoulli_product(n: int, p: float) -> FiniteDistribution:
    """``B_{n,p}``: i.i.d. bits with ``Pr[1] = p``, listed densely."""
    if n > EXACT_MAX_BITS:
        raise ValueError(f"exact mode limited to n <= {EXACT_MAX_BITS}")
    xs = np.arange(1 << n, dtype=np.int64)
    w = popcount(xs)
    with np.errstate(divide="ignore"):
        probs = np.power(p, w) * np.power(1 - p, n - w)
    return FiniteDistribution(n, xs, probs / probs.sum())


def popcount(xs: np.ndarray) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.uint64)
    out = np.zeros(xs.shape, dtype=np.int64)
    while np.any(xs):
        out += (xs & np.uint64(1)).astype(np.int64)
        xs = xs >> np.uint64(1)
    return out


def weight_class(n: int, w: int) -> list[int]:
    """All length-``n`` vectors of Hamming weight ``w``, in numeric order."""
    out = [sum(1 << i for i in c) for c in itertools.combinations(range(n), w)]
    return sorted(out)


# -- entropy and distance ---------------------------------------------------

def min_entropy(d: FiniteDistribution) -> float:
    return float(-math.log2(d.probs.max()))


def shannon_entropy(d: FiniteDistribution) -> float:
    p = d.probs
    return float(-(p * np.log2(p)).sum())


def statistical_distance(d1: FiniteDistribution, d2: FiniteDistribution) -> float:
    if d1.n != d2.n:
        raise ValueError(f"sample spaces differ: F_2^{d1.n} vs F_2^{d2.n}")
    keys = np.union1d(d1.outcomes, d2.outcomes)
    a = np.zeros(len(keys))
    b = np.zeros(len(keys))
    a[np.searchsorted(keys, d1.outcomes)] = d1.probs
    b[np.searchsorted(keys, d2.outcomes)] = d2.probs
    return float(0.5 * np.abs(a - b).sum())


def closeness_to_minentropy(d: FiniteDistribution, m: float) -> float:
    """Distance from ``d`` to the nearest distribution of min-entropy ``>= m``.

    The nearest such distribution caps every outcome at ``2^-m`` and spreads
    the removed mass over unused outcomes, so the distance is the clipped
    excess.
    """
    if m > d.n + TOL:
        raise ValueError(f"min-entropy {m} exceeds the {d.n}-bit sample space")
    return excess_over_cap(d.probs, 2.0 ** (-m))


def excess_over_cap(probs, cap: float) -> float:
    return float(np.clip(np.asarray(probs) - cap, 0.0, None).sum())


def collision_probability(d: FiniteDistribution) -> float:
    return float((d.probs**2).sum())


def convex_combination(weights: Sequence[float], parts: Sequence[FiniteDistribution]) -> FiniteDistribution:
    """``sum_i alpha_i X_i`` over a common sample space."""
    if len(weights) != len(parts) or not parts:
        raise ValueError("need one weight per component")
    n = parts[0].n
    if any(p.n != n for p in parts):
        raise ValueError("components live on different sample spaces")
    if any(w < 0 for w in weights) or abs(sum(weights) - 1) > 1e-9:
        raise ValueError("weights must be nonnegative and sum to 1")
    outs = np.concatenate([p.outcomes for p in parts])
    mass = np.concatenate([w * p.probs for w, p in zip(weights, parts)])
    return FiniteDistribution.from_counts(n, outs, mass)


def conditional(d: FiniteDistribution, mask: np.ndarray) -> FiniteDistribution | None:
    """``d`` conditioned on the outcomes selected by ``mask`` (or None if null)."""
    mass = d.probs[mask].sum()
    if mass <= 0:
        return None
    return FiniteDistribution(d.n, d.outcomes[mask], d.probs[mask] / mass)


# -- proposition-2 census ---------------------------------------------------

@dataclass(frozen=True)
class ImageCensus:
    M: int
    singletons: int           # |T|: images with exactly one preimage
    collided: int             # |T'|: images with two or more preimages
    collided_mass: int        # sum of n_y over T'
    epsilon: float            # closeness of f(X) to min-entropy log M
    codomain_size: int | None = None

    @property
    def counts_balance(self) -> bool:
        return self.singletons + self.collided_mass == self.M

    @property
    def part1_holds(self) -> bool:
        """Closeness ``eps`` forces at least ``(1 - 2 eps) M`` singletons."""
        return self.singletons >= (1 - 2 * self.epsilon) * self.M - 1e-9

    @property
    def part2_holds(self) -> bool:
        """Image support of size ``>= (1 - e) M`` gives closeness ``<= e``."""
        if self.codomain_size is not None and self.codomain_size < self.M:
            return True
        support = self.singletons + self.collided
        return self.epsilon <= 1 - support / self.M + 1e-12


def image_census(images: Sequence[int], codomain_size: int | None = None) -> ImageCensus:
    """Census of a flat source pushed through a map, given the image list."""
    counts = Counter(images).values()
    M = sum(counts)
    multi = [c for c in counts if c >= 2]
    return ImageCensus(
        M=M,
        singletons=len(counts) - len(multi),
        collided=len(multi),
        collided_mass=sum(multi),
        # clipping each n_y / M at 1 / M leaves (n_y - 1) / M per image
        epsilon=(sum(multi) - len(multi)) / M,
        codomain_size=codomain_size,
    )


def map_image_census(x: FlatDistribution, f: Callable[[int], int], codomain_size: int | None = None) -> ImageCensus:
    census = image_census([f(int(s)) for s in x.outcomes], codomain_size)
    if not census.counts_balance:
        raise AssertionError("preimage counts do not add up to M")
    return census


# -- noise decompositions ---------------------------------------------------

def binary_entropy(x: float) -> float:
    if x < 0 or x > 1:
        raise ValueError("argument outside [0, 1]")
    if x in (0.0, 1.0):
        return 0.0
    return float(-x * math.log2(x) - (1 - x) * math.log2(1 - x))


def log2_binomial(n: int, w: int) -> float:
    return math.log2(math.comb(n, w))


def binomial_pmf(n: int, p: float) -> np.ndarray:
    return np.array([math.comb(n, i) * p**i * (1 - p) ** (n - i) for i in range(n + 1)])


@dataclass(frozen=True)
class BecDecomposition:
    n: int
    p: float
    p_prime: float
    max_weight: int
    gamma: float
    low: FiniteDistribution            # B_{n,p} given weight <= n p'
    tail: FiniteDistribution | None    # B_{n,p} given weight > n p'

    def recombine(self) -> FiniteDistribution:
        if self.tail is None:
            return self.low
        return convex_combination([1 - self.gamma, self.gamma], [self.low, self.tail])


def _floor(x: float) -> int:
    return math.floor(x + 1e-9)


def _ceil(x: float) -> int:
    return math.ceil(x - 1e-9)


def bec_decomposition(n: int, p: float, p_prime: float) -> BecDecomposition:
    if not (0 <= p <= 1 and 0 <= p_prime <= 1):
        raise ValueError("need p and p' in [0, 1]")
    b = bernoulli_product(n, p)
    w = popcount(b.outcomes)
    cut = _floor(n * p_prime)
    low = conditional(b, w <= cut)
    tail = conditional(b, w > cut)
    gamma = float(b.probs[w > cut].sum())
    return BecDecomposition(n, p, p_prime, cut, gamma, low, tail)


@dataclass(frozen=True)
class BscDecomposition:
    n: int
    p: float
    eta: float
    lo: int
    hi: int
    alphas: dict[int, float]
    gamma: float
    hoeffding_bound: float
    _components: dict[int, FlatDistribution] = field(default_factory=dict, repr=False, compare=False)

    @property
    def weights(self) -> list[int]:
        return list(range(self.lo, self.hi + 1))

    @property
    def tail(self) -> FiniteDistribution | None:
        """``B_{n,p}`` conditioned on weights outside the window."""
        if self.gamma <= TOL:
            return None
        b = bernoulli_product(self.n, self.p)
        w = popcount(b.outcomes)
        return conditional(b, (w < self.lo) | (w > self.hi))

    def component(self, i: int) -> FlatDistribution:
        """``U_{n,i}``: flat on the weight-``i`` vectors."""
        if i not in self._components:
            self._components[i] = FlatDistribution(self.n, weight_class(self.n, i))
        return self._components[i]

    def ordered_components(self) -> list[tuple[float, FlatDistribution]]:
        """Normalised components by non-increasing support size."""
        mass = 1 - self.gamma
        ws = sorted(self.weights, key=lambda i: (-math.comb(self.n, i), i))
        return [(self.alphas[i] / mass, self.component(i)) for i in ws]

    def window_distribution(self) -> FiniteDistribution:
        comps = self.ordered_components()
        return convex_combination([a for a, _ in comps], [c for _, c in comps])

    def recombine(self) -> FiniteDistribution:
        ws = self.weights
        parts = [self.component(i) for i in ws]
        alphas = [self.alphas[i] for i in ws]
        if self.tail is not None:
            parts.append(self.tail)
            alphas.append(self.gamma)
        total = sum(alphas)
        return convex_combination([a / total for a in alphas], parts)


def hoeffding_constant(eta: float) -> float:
    return 2 * eta * eta


def bsc_flat_decomposition(n: int, p: float, eta: float) -> BscDecomposition:
    """Split ``B_{n,p}`` into flat weight classes near ``np`` plus a tail."""
    if not (0 < p <= 0.5) or eta <= 0:
        raise ValueError("need 0 < p <= 1/2 and eta > 0")
    lo = max(0, _ceil(n * (p - eta)))
    hi = min(n, _floor(n * (p + eta)))
    if lo > hi:
        raise ValueError(f"window [{n * (p - eta):.3f}, {n * (p + eta):.3f}] holds no integer weight")
    pmf = binomial_pmf(n, p)
    alphas = {i: float(pmf[i]) for i in range(lo, hi + 1)}
    gamma = max(0.0, 1.0 - sum(alphas.values()))
    bound = min(1.0, 2 * math.exp(-hoeffding_constant(eta) * n))
    if gamma > bound + 1e-12:
        raise AssertionError(f"tail mass {gamma} exceeds Hoeffding bound {bound}")
    return BscDecomposition(n, p, eta, lo, hi, alphas, gamma, bound)


def clopper_pearson(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Exact binomial confidence interval for ``successes / trials``."""
    if trials == 0:
        return 0.0, 1.0
    a = (1 - level) / 2
    lo = 0.0 if successes == 0 else float(stats.beta.ppf(a, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(stats.beta.ppf(1 - a, successes + 1, trials - successes))
    return lo, hi
