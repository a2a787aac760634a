"""The verification battery: every check measured against its claimed bound.

Each check returns a :class:`CheckResult` with the measured and claimed
values.  Checks are registered by a short descriptive key, which is what
``--filter`` matches against.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ensembles
from .channels import PatternDistribution, Channel, capacity, rng_stream
from .concat import concat_error_experiment, justesen_code
from .condensers import (
    AffineSource,
    dual_condenser_scan,
    coordinate_sources,
    dual_family,
    duality_check,
    guv_condenser,
    linear_hash_family,
    verify_condenser,
    verify_lossless_monotone,
)
from .decoders import CONFUSABLE, DECODER, ensemble_to_condenser_check, flat_noise_census, mixture_noise_census
from .ensembles import F_KIND, G_KIND, build_ensemble, erasure_census, patterns_up_to, random_pattern_census
from .gf2 import BitMatrix, rank
from .probability import (
    FlatDistribution,
    bec_decomposition,
    bernoulli_product,
    binary_entropy,
    bsc_flat_decomposition,
)


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    measured: str
    claimed: str
    seconds: float = 0.0
    metrics: dict[str, float] = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.key}: {self.title} | measured {self.measured} | claimed {self.claimed} | {self.seconds:.1f}s"


@dataclass(frozen=True)
class Check:
    number: int | None
    key: str
    title: str
    fn: Callable[[int], CheckResult]


REGISTRY: list[Check] = []


def check(number, key, title):
    def wrap(fn):
        def run(seed: int) -> CheckResult:
            t0 = time.perf_counter()
            try:
                res = fn(seed)
            except Exception as exc:  # a crashed check is a failed check
                res = CheckResult(key, title, False, f"error: {type(exc).__name__}: {exc}", "no error")
            res.key, res.title = key, title
            res.seconds = time.perf_counter() - t0
            return res

        REGISTRY.append(Check(number, key, title, run))
        return run

    return wrap


def _fmt(x: float) -> str:
    return f"{x:.4g}"


# ---------------------------------------------------------------------------
# source panels


def random_flat(n: int, size: int, rng: np.random.Generator) -> FlatDistribution:
    return FlatDistribution(n, rng.choice(1 << n, size=size, replace=False))


def flat_panel(n: int, m: int, randoms: int, rng: np.random.Generator) -> list[FlatDistribution]:
    """First and last ``2^m`` points, a coordinate subspace on the top bits, and random supports."""
    size = 1 << m
    out = [
        FlatDistribution(n, range(size)),
        FlatDistribution(n, range((1 << n) - size, 1 << n)),
        FlatDistribution(n, [x << (n - m) for x in range(size)]),
    ]
    out += [random_flat(n, size, rng) for _ in range(randoms)]
    return out


def surjective_hash(n: int, r: int):
    """The linear hash family with every seed matrix rank-repaired."""
    return linear_hash_family(n, r).map_matrices(ensembles.repair_rank)


# ---------------------------------------------------------------------------
# checks


@check(1, "universality", "pairwise collision census of the linear hash family")
def universality(seed: int) -> CheckResult:
    worst_ratio = 0.0
    for n in (4, 6, 8):
        xs = np.arange(1 << n)
        for r in range(1, n + 1):
            imgs = linear_hash_family(n, r).evaluate_all(xs)
            worst = 0
            for x in range((1 << n) - 1):
                worst = max(worst, int((imgs[:, x : x + 1] == imgs[:, x + 1 :]).sum(axis=0).max()))
            worst_ratio = max(worst_ratio, (worst / (1 << n)) / 2.0**-r)
    ok = worst_ratio <= 1.0
    return CheckResult("", "", ok, f"max Pr[collide] * 2^r = {_fmt(worst_ratio)}", "<= 1", metrics={"worst_ratio": worst_ratio})


@check(2, "leftover-hash", "hashing extracts and condenses flat sources")
def leftover_hash(seed: int) -> CheckResult:
    rng = rng_stream(seed, 2)
    n = 8
    sources = 0
    worst = {}
    for eps in (0.5, 0.25):
        slack = int(round(2 * math.log2(1 / eps)))
        w_ext = w_loss = 0.0
        for m in range(2, 7):
            panel = flat_panel(n, m, 8, rng)
            r_ext, r_loss = m - slack, m + slack
            for x in panel:
                sources += 1
                if 1 <= r_ext:
                    w_ext = max(w_ext, verify_condenser(linear_hash_family(n, r_ext), x, r_ext))
                if r_loss <= n:
                    w_loss = max(w_loss, verify_condenser(linear_hash_family(n, r_loss), x, m))
        worst[eps] = (w_ext, w_loss)
    ok = sources >= 50 and all(e <= eps and l <= eps for eps, (e, l) in worst.items())
    meas = ", ".join(f"eps={eps}: extract {_fmt(e)} / lossless {_fmt(l)}" for eps, (e, l) in worst.items())
    return CheckResult("", "", ok, f"{sources} sources; {meas}", "each <= eps", metrics={
        f"{part}_eps{eps}": v for eps, pair in worst.items() for part, v in zip(("extract", "lossless"), pair)
    })


@check(3, "guv", "polynomial condenser is linear per seed and lossless")
def guv(seed: int) -> CheckResult:
    rng = rng_stream(seed, 3)
    f = guv_condenser(4, 3, 3, 2)
    xs = rng.integers(0, 1 << f.n, size=(10_000, 2))
    zs = rng.integers(0, f.num_seeds, size=10_000)
    nonlinear = sum(
        f.evaluate(int(a) ^ int(b), int(z)) != f.evaluate(int(a), int(z)) ^ f.evaluate(int(b), int(z))
        for (a, b), z in zip(xs, zs)
    )
    worst = 0.0
    for m in range(1, 7):
        for x in flat_panel(f.n, m, 3, rng):
            per_m = verify_lossless_monotone(f, x, range(0, m + 1), samples=2, seed=seed)
            worst = max(worst, max(per_m.values()))
    ok = nonlinear == 0 and worst <= 0.25
    return CheckResult(
        "", "", ok, f"{nonlinear} nonlinear triples; worst eps over m' <= m <= 6: {_fmt(worst)}", "0 and <= 0.25",
        metrics={"nonlinear": nonlinear, "worst_eps": worst},
    )


def _bernoulli_pattern_panel(ens, eps: float, n: int, p: float, p_prime: float, trials: int, seed: int):
    dec = bec_decomposition(n, p, p_prime)
    rng = rng_stream(seed, 40)
    return dec, random_pattern_census(ens, PatternDistribution(n, p), trials, rng, eps, slack=dec.gamma)


@check(4, "erasure-census", "few codes fail any small erasure pattern")
def erasure(seed: int) -> CheckResult:
    n, m = 10, 4
    pats = patterns_up_to(n, m)
    out, ok, metrics = [], True, {}
    for kind, cond in ((F_KIND, linear_hash_family(n, 6, kind="lossless")), (G_KIND, linear_hash_family(n, 4, kind="extractor"))):
        ens = build_ensemble(kind, cond)
        census = erasure_census(ens, pats)
        ratio = float(np.max(census.intolerant / np.maximum(3 * census.epsilon, 1e-300)))
        dec, cor = _bernoulli_pattern_panel(ens, census.worst_epsilon, n, 0.35, 0.40, 100, seed)
        ok &= census.holds() and cor.holds
        out.append(
            f"{kind}: max intolerant/(3 eps) {_fmt(ratio)} over {len(pats)} patterns; "
            f"B(10,0.35) good codes {_fmt(cor.fraction_good)} (need {_fmt(cor.required)}, gamma {_fmt(dec.gamma)})"
        )
        metrics[f"{kind}_ratio"] = ratio
        metrics[f"{kind}_good"] = cor.fraction_good
    return CheckResult("", "", ok, "; ".join(out), "ratio <= 1; good >= 1 - sqrt(3 eps)", metrics=metrics)


@check(5, "flat-noise-decoding", "few codes decode flat noise badly")
def flat_noise(seed: int) -> CheckResult:
    rng = rng_stream(seed, 5)
    n, m = 12, 4
    ens = build_ensemble(F_KIND, linear_hash_family(n, 10, kind="lossless", m=m, epsilon=0.125))
    panel = flat_panel(n, m, 6, rng)
    panel.append(AffineSource(BitMatrix.from_rows([0b11, 0b101, 0b1001, 0b10001], n), 1 << 11).distribution())
    worst_margin, ok = -math.inf, True
    for z in panel:
        for rule in (CONFUSABLE, DECODER):
            c = flat_noise_census(ens, z, rule)
            ok &= c.holds
            worst_margin = max(worst_margin, c.fraction_bad - c.allowed_bad)
    return CheckResult(
        "", "", ok, f"{len(panel)} sources, max (bad fraction - 2 sqrt eps) = {_fmt(worst_margin)}", "<= 0",
        metrics={"worst_margin": worst_margin},
    )


@check(6, "tuned-decoding", "tie-broken decoder on the binomial window mixture")
def tuned(seed: int) -> CheckResult:
    n, p, eta = 12, 0.1, 0.1
    dec = bsc_flat_decomposition(n, p, eta)
    comps = dec.ordered_components()
    t = len(comps)
    ok, rows, metrics = t <= 3, [], {"t": t}
    for r in (9, 10, 11, 12):
        ens = build_ensemble(F_KIND, linear_hash_family(n, r, kind="lossless"))
        for rule in (CONFUSABLE, DECODER):
            c = mixture_noise_census(ens, comps, rule)
            ok &= c.holds
            metrics[f"r{r}_{rule}_bad"] = c.fraction_bad
        rows.append(f"r={r}: eps {_fmt(c.epsilon)}, bad {_fmt(c.fraction_bad)} <= {_fmt(c.allowed_bad)}")
    return CheckResult("", "", ok, f"t={t}; " + "; ".join(rows), "bad fraction <= t(t+1) sqrt eps", metrics=metrics)


@check(7, "converse", "good decoding ensembles give lossless condensers")
def converse(seed: int) -> CheckResult:
    rng = rng_stream(seed, 7)
    ens = build_ensemble(F_KIND, linear_hash_family(9, 6, kind="lossless"))
    worst, ok = -math.inf, True
    count = 0
    for m in (3, 4, 5, 6):
        for z in flat_panel(9, m, 3, rng):
            c = ensemble_to_condenser_check(ens, z)
            ok &= c.holds
            worst = max(worst, c.measured - c.bound)
            count += 1
    return CheckResult("", "", ok, f"{count} sources, max (eps - 2 eps_dec - gamma) = {_fmt(worst)}", "<= 0",
                       metrics={"worst_margin": worst})


@check(8, "duality", "dual rank bound and the affine condenser equivalence")
def duality(seed: int) -> CheckResult:
    rng = rng_stream(seed, 8)
    failures = 0
    for _ in range(10_000):
        n = int(rng.integers(2, 13))
        r = int(rng.integers(1, n + 1))
        m = int(rng.integers(1, n + 1))
        g = _random_full_rank(r, n, rng)
        src = AffineSource(_random_full_rank(m, n, rng))
        primal = rank(g @ src.basis.T)
        mp = int(rng.integers(0, primal + 1))
        failures += not duality_check(g, src, mp).holds
    scans = 0
    iff_ok = True
    for n, r in ((6, 3), (8, 4), (8, 5)):
        f = surjective_hash(n, r)
        g = dual_family(f)
        for m in range(1, n + 1):
            for mp in range(0, min(m, r) + 1):
                scan = dual_condenser_scan(f, g, m, mp, coordinate_sources(n, m))
                iff_ok &= scan.holds
                scans += 1
    ok = failures == 0 and iff_ok
    return CheckResult("", "", ok, f"{failures} rank failures in 10000; equivalence on {scans} panels: {iff_ok}",
                       "0 failures; all panels", metrics={"failures": failures, "panels": scans})


def _random_full_rank(rows: int, cols: int, rng) -> BitMatrix:
    while True:
        m = BitMatrix.random(rows, cols, rng)
        if rank(m) == rows:
            return m


@check(9, "concat", "concatenation beats one inner block and improves with length")
def concat(seed: int) -> CheckResult:
    trials = 10_000
    ch = Channel.bec(0.2)
    res = {}
    for rate in (0.75, 0.9):
        for s in (16, 32, 64):
            cc = justesen_code(10, 6, s, round(rate * s))
            res[rate, s] = concat_error_experiment(cc, ch, trials, seed)
    beats = all(res[rate, 32].block_error_rate < res[rate, 32].inner_failure_rate for rate in (0.75, 0.9))
    decreasing = all(
        res[rate, a].block_error_ci[0] > res[rate, b].block_error_ci[1]
        for rate in (0.75, 0.9)
        for a, b in ((16, 32), (32, 64))
    )
    meas = "; ".join(
        f"k'/s={rate} s={s}: block {_fmt(e.block_error_rate)} [{_fmt(e.block_error_ci[0])},{_fmt(e.block_error_ci[1])}]"
        f" inner {_fmt(e.inner_failure_rate)}"
        for (rate, s), e in res.items()
    )
    metrics = {f"block_{rate}_{s}": e.block_error_rate for (rate, s), e in res.items()}
    metrics.update({f"inner_{rate}_{s}": e.inner_failure_rate for (rate, s), e in res.items()})
    return CheckResult("", "", beats and decreasing, meas, "block < inner at s=32; CIs strictly decreasing in s",
                       metrics=metrics)


@check(10, "capacity", "channel capacity formulas")
def capacities(seed: int) -> CheckResult:
    worst_bec = worst_bsc = worst_add = 0.0
    for p in np.linspace(0, 1, 101):
        worst_bec = max(worst_bec, abs(capacity(Channel.bec(p)) - (1 - p)))
        h = 0.0 if p in (0, 1) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)
        worst_bsc = max(worst_bsc, abs(capacity(Channel.bsc(p)) - (1 - h)))
    for n in range(1, 17):
        for p in (0.01, 0.11, 0.25, 0.5):
            worst_add = max(worst_add, abs(capacity(Channel.additive(bernoulli_product(n, p))) - (1 - binary_entropy(p))))
    ok = worst_bec <= 1e-12 and worst_bsc <= 1e-12 and worst_add <= 1e-9
    return CheckResult("", "", ok, f"BEC {worst_bec:.2e}, BSC {worst_bsc:.2e}, additive {worst_add:.2e}",
                       "<= 1e-12, 1e-12, 1e-9", metrics={"bec": worst_bec, "bsc": worst_bsc, "additive": worst_add})


@check(None, "ensemble-invariants", "every ensemble code has the right shape")
def invariants(seed: int) -> CheckResult:
    problems = 0
    checked = 0
    for kind, cond in ((G_KIND, linear_hash_family(6, 3)), (F_KIND, linear_hash_family(6, 3, kind="lossless"))):
        ens = build_ensemble(kind, cond)
        for u in ens.seeds():
            checked += 1
            try:
                code = ens.code(u)
            except ValueError:
                problems += 1
                continue
            bad = not (code.generator @ code.parity.T).is_zero()
            if kind == G_KIND:
                bad |= code.k != cond.r or rank(code.generator) != cond.r
                bad |= rank(cond.matrix_for_seed(u)) == cond.r and code.generator != cond.matrix_for_seed(u)
            else:
                bad |= code.parity != cond.matrix_for_seed(u) or code.k < cond.n - cond.r
            problems += bad
    return CheckResult("", "", problems == 0, f"{problems} bad codes of {checked}", "0", metrics={"bad": problems})


# ---------------------------------------------------------------------------


def select(filter_name: str | None = None) -> list[Check]:
    if not filter_name:
        return list(REGISTRY)
    return [c for c in REGISTRY if filter_name in c.key or filter_name == str(c.number)]


def run_suite(filter_name: str | None = None, seed: int = 0, echo: Callable[[str], None] | None = print) -> list[CheckResult]:
    results = []
    for c in select(filter_name):
        res = c.fn(seed)
        results.append(res)
        if echo:
            echo(res.line())
    return results
