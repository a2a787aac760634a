"""Erasure decoding, syndrome decoding and exact error probabilities.

Brute-force decoding scans the noise support in a fixed order: components
from the highest index down (the tuned rule), numeric order inside a
component.  With a single component this is the plain first-candidate rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .condensers import CondenserParams, LinearCondenser, verify_condenser
from .ensembles import F_KIND, CodeEnsemble, LinearCode
from .gf2 import BitMatrix, parity
from .probability import FiniteDistribution, FlatDistribution

SUCCESS = "success"
FAILURE = "failure"
AMBIGUOUS = "ambiguous-resolved"


@dataclass(frozen=True)
class DecodeOutcome:
    status: str
    estimate: int            # message (erasures) or codeword (noise)
    noise: int | None = None
    candidates: int = 1

    @property
    def ok(self) -> bool:
        return self.status != FAILURE


def erasure_decode(code: LinearCode, received: int, erased: int) -> DecodeOutcome:
    """Recover the message from the unerased positions by elimination.

    On rank deficiency the status is failure and the estimate is the
    solution with every free message bit zero.
    """
    rk, pivots, masks, checks = code.erasure_solver(erased)
    y = received & ~erased
    if any(parity(c & y) for c in checks):
        return DecodeOutcome(FAILURE, 0, candidates=0)
    x = 0
    for pc, mask in zip(pivots, masks):
        if parity(mask & y):
            x |= 1 << pc
    if rk < code.k:
        return DecodeOutcome(FAILURE, x, candidates=1 << (code.k - rk))
    return DecodeOutcome(SUCCESS, x)


def syndrome(parity_matrix: BitMatrix, y: int) -> int:
    return parity_matrix.mul_vec(y)


def _scan_order(components: Sequence[Sequence[int]]) -> list[int]:
    order = []
    for comp in reversed(components):
        order.extend(sorted(int(z) for z in comp))
    return order


def brute_force_decode(code: LinearCode, received: int, noise_support) -> DecodeOutcome:
    """Find ``z`` in the support with ``received + z`` a codeword; first wins."""
    return tuned_brute_force_decode(code, received, [noise_support])


def tuned_brute_force_decode(code: LinearCode, received: int, components: Sequence) -> DecodeOutcome:
    """Prefer the matching ``z`` from the highest-index (smallest) component."""
    comps = [c.outcomes if isinstance(c, FiniteDistribution) else c for c in components]
    target = code.syndrome(received)
    hits = [z for z in _scan_order(comps) if code.syndrome(z) == target]
    if not hits:
        return DecodeOutcome(FAILURE, 0, candidates=0)
    z = hits[0]
    status = SUCCESS if len(hits) == 1 else AMBIGUOUS
    return DecodeOutcome(status, received ^ z, z, len(hits))


# ---------------------------------------------------------------------------
# exact error profiles


@dataclass(frozen=True)
class NoiseModel:
    """Flat components with weights; supports are assumed disjoint."""

    n: int
    outcomes: np.ndarray       # all support points
    component: np.ndarray      # component index of each point
    probs: np.ndarray          # probability of each point

    @classmethod
    def from_components(cls, weighted: Sequence[tuple[float, FlatDistribution]]) -> "NoiseModel":
        total = sum(a for a, _ in weighted)
        outs, comp, probs = [], [], []
        for i, (a, d) in enumerate(weighted):
            outs.append(d.outcomes)
            comp.append(np.full(len(d.outcomes), i))
            probs.append(np.full(len(d.outcomes), a / total / len(d.outcomes)))
        outs = np.concatenate(outs)
        if len(np.unique(outs)) != len(outs):
            raise ValueError("component supports overlap")
        return cls(weighted[0][1].n, outs, np.concatenate(comp), np.concatenate(probs))

    @classmethod
    def from_distribution(cls, d: FiniteDistribution) -> "NoiseModel":
        return cls(d.n, d.outcomes, np.zeros(len(d.outcomes), dtype=np.int64), d.probs)


DECODER = "decoder"
CONFUSABLE = "confusable"


def error_profile(f: LinearCondenser, noise: NoiseModel, rule: str = DECODER) -> np.ndarray:
    """Per-seed error of syndrome decoding with parity matrix ``M_z``.

    ``decoder``: mass of noise the tuned first-candidate decoder gets wrong.
    ``confusable``: mass of noise that some other support point at an equal
    or higher component index shares a syndrome with (the worst case over
    tie-breaking).
    """
    if rule not in (DECODER, CONFUSABLE):
        raise ValueError(f"unknown rule {rule!r}")
    syn = f.evaluate_all(noise.outcomes)                    # (seeds, M)
    D, M = syn.shape
    seed = np.repeat(np.arange(D), M)
    syn = syn.ravel()
    comp = np.tile(noise.component, D)
    z = np.tile(noise.outcomes, D)
    prob = np.tile(noise.probs, D)
    order = np.lexsort((z, -comp, syn, seed))
    seed, syn, comp, prob = seed[order], syn[order], comp[order], prob[order]
    new_group = np.ones(len(seed), dtype=bool)
    new_group[1:] = (seed[1:] != seed[:-1]) | (syn[1:] != syn[:-1])
    if rule == DECODER:
        bad = ~new_group
    else:
        gid = np.cumsum(new_group) - 1
        start = np.flatnonzero(new_group)[gid]
        # last index of each (group, component) run; the sort puts higher
        # components first, so it counts members with component >= own
        run_end = np.ones(len(seed), dtype=bool)
        run_end[:-1] = new_group[1:] | (comp[1:] != comp[:-1])
        ends = np.flatnonzero(run_end)
        last = ends[np.searchsorted(ends, np.arange(len(seed)))]
        bad = (last - start + 1) >= 2
    return np.bincount(seed, weights=prob * bad, minlength=D)


def exact_error_probability(code: LinearCode, noise, rule: str = CONFUSABLE) -> float:
    """Error of brute-force syndrome decoding for one code.

    ``noise`` is a distribution, a :class:`NoiseModel`, or a list of
    ``(weight, flat component)`` pairs ordered by non-increasing support.
    """
    model = _as_model(noise)
    f = LinearCondenser.from_matrices(_single_params(code), [code.parity])
    return float(error_profile(f, model, rule)[0])


def _as_model(noise) -> NoiseModel:
    if isinstance(noise, NoiseModel):
        return noise
    if isinstance(noise, FiniteDistribution):
        return NoiseModel.from_distribution(noise)
    return NoiseModel.from_components(noise)


def _single_params(code: LinearCode):
    return CondenserParams(code.n, 0, code.parity.rows, 0.0, 0.0)


def ensemble_error_profile(ens: CodeEnsemble, noise, rule: str = CONFUSABLE) -> np.ndarray:
    if ens.kind != F_KIND:
        raise ValueError("syndrome decoding profiles use the parity-check (F) ensemble")
    return error_profile(ens.condenser, _as_model(noise), rule)


# ---------------------------------------------------------------------------
# ensemble-level checks


@dataclass(frozen=True)
class SeedErrorCensus:
    epsilon: float           # measured lossless error driving the bound
    threshold: float         # error level a good seed must meet
    allowed_bad: float       # fraction of seeds allowed above it
    fraction_bad: float
    profile: np.ndarray

    @property
    def holds(self) -> bool:
        return self.fraction_bad <= self.allowed_bad + 1e-12


def flat_noise_census(ens: CodeEnsemble, z: FlatDistribution, rule: str = CONFUSABLE) -> SeedErrorCensus:
    """Seeds whose error on flat noise ``Z`` exceeds ``sqrt(eps)``, against ``2 sqrt(eps)``."""
    m = math.log2(len(z.outcomes))
    eps = verify_condenser(ens.condenser, z, m)
    prof = ensemble_error_profile(ens, z, rule)
    root = math.sqrt(eps)
    return SeedErrorCensus(eps, root, 2 * root, float(np.mean(prof > root + 1e-12)), prof)


def union_epsilon(f: LinearCondenser, comps: Sequence[FlatDistribution]) -> float:
    """Worst lossless error over the flat unions of every pair of components."""
    worst = 0.0
    for i in range(len(comps)):
        for j in range(i, len(comps)):
            sup = np.union1d(comps[i].outcomes, comps[j].outcomes)
            worst = max(worst, verify_condenser(f, FlatDistribution(f.n, sup), math.log2(len(sup))))
    return worst


def mixture_noise_census(
    ens: CodeEnsemble, weighted: Sequence[tuple[float, FlatDistribution]], rule: str = CONFUSABLE
) -> SeedErrorCensus:
    """Tuned-decoder census for a mixture of ``t`` flat components.

    Seeds with error above ``2 t sqrt(eps)`` must make up at most a
    ``t (t + 1) sqrt(eps)`` fraction, with ``eps`` the worst pairwise-union
    lossless error.
    """
    t = len(weighted)
    sizes = [len(d.outcomes) for _, d in weighted]
    if sizes != sorted(sizes, reverse=True):
        raise ValueError("components must be ordered by non-increasing support")
    eps = union_epsilon(ens.condenser, [d for _, d in weighted])
    prof = ensemble_error_profile(ens, NoiseModel.from_components(weighted), rule)
    root = math.sqrt(eps)
    return SeedErrorCensus(eps, 2 * t * root, t * (t + 1) * root, float(np.mean(prof > 2 * t * root + 1e-12)), prof)


@dataclass(frozen=True)
class ConverseCheck:
    measured: float           # lossless error of (x, u) -> H_u x on Z
    eps_dec: float            # decoder error level chosen
    gamma: float              # fraction of seeds above eps_dec
    bound: float              # 2 eps_dec + gamma, minimised over levels

    @property
    def holds(self) -> bool:
        return self.measured <= self.bound + 1e-12


def ensemble_to_condenser_check(ens: CodeEnsemble, z: FlatDistribution) -> ConverseCheck:
    """Measured lossless error of the syndrome map versus ``2 eps_dec + gamma``.

    ``eps_dec`` ranges over the per-seed decoder errors actually observed
    (plus zero); ``gamma`` is the fraction of seeds doing worse.
    """
    prof = ensemble_error_profile(ens, z, DECODER)
    measured = verify_condenser(ens.condenser, z, math.log2(len(z.outcomes)))
    best = (math.inf, 0.0, 1.0)
    for level in np.unique(np.concatenate([[0.0], prof])):
        gamma = float(np.mean(prof > level + 1e-12))
        if 2 * level + gamma < best[0]:
            best = (2 * level + gamma, float(level), gamma)
    return ConverseCheck(measured, best[1], best[2], best[0])
