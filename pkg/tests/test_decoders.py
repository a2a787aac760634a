import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from condcodes.channels import rng_stream
from condcodes.condensers import (
    CondenserParams,
    LinearCondenser,
    linear_hash_family,
    per_seed_closeness,
    zero_condenser,
)
from condcodes.decoders import (
    AMBIGUOUS,
    CONFUSABLE,
    DECODER,
    FAILURE,
    SUCCESS,
    NoiseModel,
    brute_force_decode,
    ensemble_error_profile,
    ensemble_to_condenser_check,
    erasure_decode,
    error_profile,
    exact_error_probability,
    flat_noise_census,
    mixture_noise_census,
    syndrome,
    tuned_brute_force_decode,
)
from condcodes.ensembles import F_KIND, LinearCode, build_ensemble, tolerates_erasure
from condcodes.gf2 import BitMatrix, rank
from condcodes.probability import FlatDistribution, bernoulli_product, point_mass, weight_class


def random_code(n, k, rng):
    while True:
        g = BitMatrix.random(k, n, rng)
        if rank(g) == k:
            return LinearCode.from_generator(g)


def random_parity_code(n, r, rng):
    return LinearCode.from_parity(BitMatrix.random(r, n, rng))


def codes(n, k):
    return st.integers(0, 2**32 - 1).map(lambda s: random_code(n, k, np.random.default_rng(s)))


# -- erasures --------------------------------------------------------------


def test_erasure_decode_trivial(rng):
    code = random_code(8, 3, rng)
    for x in range(8):
        out = erasure_decode(code, code.encode(x), 0)
        assert out.status == SUCCESS and out.estimate == x
    assert erasure_decode(code, 0, 0xFF).status == FAILURE


@pytest.mark.parametrize("n,k", [(6, 3), (8, 2), (10, 5), (12, 4)])
def test_erasure_decode_iff_tolerated_all_patterns(n, k, rng):
    code = random_code(n, k, rng)
    x = int(rng.integers(0, 1 << k))
    cw = code.encode(x)
    for s in range(1 << n):
        out = erasure_decode(code, cw & ~s, s)
        assert out.ok == (out.status == SUCCESS)
        assert (out.status == SUCCESS) == tolerates_erasure(code, s)
        if out.status == SUCCESS:
            assert out.estimate == x
        else:
            # the fallback is still a consistent message
            keep = ~s & ((1 << n) - 1)
            assert code.encode(out.estimate) & keep == cw & keep


@given(codes(12, 4), st.integers(0, 2**12 - 1), st.integers(0, 15))
def test_erasure_decode_matches_codeword_matching(code, s, x):
    keep = ~s & 0xFFF
    cw = code.encode(x)
    matches = [m for m in range(16) if code.encode(m) & keep == cw & keep]
    out = erasure_decode(code, cw & keep, s)
    if len(matches) == 1:
        assert out.status == SUCCESS and out.estimate == matches[0]
    else:
        assert out.status == FAILURE and out.estimate in matches


# -- syndromes -------------------------------------------------------------


@given(codes(10, 4), st.integers(0, 15), st.integers(0, 1023))
def test_syndrome_ignores_codeword(code, x, z):
    h = code.parity
    assert syndrome(h, code.encode(x)) == 0
    assert syndrome(h, code.encode(x) ^ z) == syndrome(h, z)


def test_syndrome_of_zero_code():
    h = BitMatrix.identity(5)
    assert syndrome(h, 0b10110) == 0b10110


# -- brute force -----------------------------------------------------------


def cross_product_candidates(code, received, support):
    """Every (codeword, noise) pair reproducing ``received``."""
    return [(c, z) for c in code.codewords() for z in support if c ^ z == received]


def test_brute_force_identity_with_zero_noise(rng):
    code = random_code(8, 4, rng)
    for c in code.codewords():
        out = brute_force_decode(code, c, [0])
        assert out.status == SUCCESS and out.estimate == c and out.noise == 0


@given(codes(8, 3), st.integers(0, 2**32 - 1))
def test_brute_force_matches_cross_product(code, seed):
    rng = np.random.default_rng(seed)
    support = sorted({int(v) for v in rng.integers(0, 256, size=12)})
    c = code.encode(int(rng.integers(0, 8)))
    z = support[int(rng.integers(0, len(support)))]
    pairs = cross_product_candidates(code, c ^ z, support)
    out = brute_force_decode(code, c ^ z, support)
    first = min(pairs, key=lambda p: p[1])
    assert out.candidates == len(pairs)
    assert (out.estimate, out.noise) == first
    assert out.status == (SUCCESS if len(pairs) == 1 else AMBIGUOUS)


def test_brute_force_no_candidate(rng):
    code = LinearCode.from_parity(BitMatrix.identity(4))      # code = {0}
    out = brute_force_decode(code, 0b0011, [0b0001])
    assert out.status == FAILURE and out.estimate == 0


def test_tuned_prefers_last_component():
    code = LinearCode.from_generator(BitMatrix.from_rows([0b0011], 4))
    # received 0b0001 can be explained by z = 0b0001 or z = 0b0010
    out = tuned_brute_force_decode(code, 0b0001, [[0b0001, 0b1000], [0b0010]])
    assert out.noise == 0b0010 and out.estimate == 0b0011
    plain = brute_force_decode(code, 0b0001, [0b0001, 0b0010])
    assert plain.noise == 0b0001
    single = tuned_brute_force_decode(code, 0b0001, [[0b0010, 0b0001]])
    assert single == plain


@given(codes(8, 3), st.integers(0, 2**32 - 1))
def test_success_survives_support_shrinkage(code, seed):
    rng = np.random.default_rng(seed)
    support = sorted({int(v) for v in rng.integers(0, 256, size=16)})
    z = support[0]
    received = code.encode(int(rng.integers(0, 8))) ^ z
    full = brute_force_decode(code, received, support)
    smaller = [v for v in support if v == z or rng.random() < 0.5]
    if full.status != FAILURE and full.noise == z:
        assert brute_force_decode(code, received, smaller).noise == z


# -- exact error probabilities --------------------------------------------


def decoder_error_oracle(code, components, probs):
    """Loop over every realisation and run the tuned decoder."""
    err = 0.0
    for comp, p in zip(components, probs):
        for z in comp:
            out = tuned_brute_force_decode(code, z, components)
            if out.noise != z:
                err += p
    return err


def confusable_oracle(code, components, probs):
    err = 0.0
    for i, (comp, p) in enumerate(zip(components, probs)):
        later = [z2 for c2 in components[i:] for z2 in c2]
        for z in comp:
            if any(z2 != z and code.syndrome(z2) == code.syndrome(z) for z2 in later):
                err += p
    return err


def disjoint_components(rng, n, sizes):
    pts = rng.permutation(1 << n)[: sum(sizes)]
    out, i = [], 0
    for s in sizes:
        out.append(sorted(int(v) for v in pts[i : i + s]))
        i += s
    return out


@pytest.mark.parametrize("trial", range(6))
def test_error_profile_matches_loop_oracles(trial):
    rng = np.random.default_rng(trial)
    n = 8
    code = random_parity_code(n, 5, rng)
    comps = disjoint_components(rng, n, [20, 9, 4])
    weights = [0.5, 0.3, 0.2]
    weighted = [(a, FlatDistribution(n, c)) for a, c in zip(weights, comps)]
    per_point = [a / len(c) for a, c in zip(weights, comps)]
    assert exact_error_probability(code, weighted, DECODER) == pytest.approx(decoder_error_oracle(code, comps, per_point))
    assert exact_error_probability(code, weighted, CONFUSABLE) == pytest.approx(confusable_oracle(code, comps, per_point))


def test_exact_error_trivial_cases(rng):
    code = random_parity_code(6, 3, rng)
    assert exact_error_probability(code, point_mass(6, 0)) == 0.0
    ident = LinearCode.from_parity(BitMatrix.identity(6))
    assert exact_error_probability(ident, bernoulli_product(6, 0.3)) == 0.0


def test_overlapping_components_rejected():
    with pytest.raises(ValueError):
        NoiseModel.from_components([(0.5, FlatDistribution(4, [1, 2])), (0.5, FlatDistribution(4, [2]))])


@pytest.mark.parametrize("trial", range(5))
def test_flat_decoder_error_equals_per_seed_closeness(trial):
    rng = np.random.default_rng(100 + trial)
    n, m = 10, 5
    f = linear_hash_family(n, 6, kind="lossless").restrict(range(0, 1024, 37))
    z = FlatDistribution(n, rng.choice(1 << n, size=1 << m, replace=False))
    dec = error_profile(f, NoiseModel.from_distribution(z), DECODER)
    conf = error_profile(f, NoiseModel.from_distribution(z), CONFUSABLE)
    close = per_seed_closeness(f, z, m)
    assert np.allclose(dec, close)
    assert np.all(dec <= conf + 1e-12)
    assert np.all(conf <= 2 * close + 1e-12)


def test_exact_error_matches_monte_carlo():
    rng = rng_stream(5)
    n = 10
    code = random_parity_code(n, 6, np.random.default_rng(8))
    z = FlatDistribution(n, np.random.default_rng(9).choice(1 << n, size=40, replace=False))
    exact = exact_error_probability(code, z, DECODER)
    trials = 100_000
    draws = rng.choice(z.outcomes, size=trials)
    wrong = {int(v): tuned_brute_force_decode(code, int(v), [z]).noise != int(v) for v in z.outcomes}
    est = np.mean([wrong[int(v)] for v in draws])
    sigma = math.sqrt(max(exact * (1 - exact), 1e-12) / trials)
    assert abs(est - exact) <= 3 * sigma + 1e-9


def test_exact_error_bounds_channel_error():
    # Monte-Carlo p_e of the full channel code (random messages) never beats
    # the noise-only syndrome error by more than sampling noise
    rng = rng_stream(6)
    n = 10
    code = random_parity_code(n, 5, np.random.default_rng(3))
    noise = bernoulli_product(n, 0.05)
    support = noise.outcomes[noise.probs > 1e-4]
    trimmed = FlatDistribution(n, support)
    exact = exact_error_probability(code, noise, CONFUSABLE)
    trials, errors = 3000, 0
    words = code.codewords()
    for _ in range(trials):
        c = words[int(rng.integers(0, len(words)))]
        z = int(rng.choice(noise.outcomes, p=noise.probs))
        out = brute_force_decode(code, c ^ z, trimmed.outcomes)
        errors += out.estimate != c
    assert errors / trials <= exact + 3 * math.sqrt(0.25 / trials) + noise.probs[noise.probs <= 1e-4].sum()


# -- ensemble level --------------------------------------------------------


def test_zero_error_condenser_round_trip():
    # identity parity: injective, so decoding never fails and losslessness is exact
    f = LinearCondenser.from_matrices(CondenserParams(6, 0, 6, 6, 0.0), [BitMatrix.identity(6)])
    ens = build_ensemble(F_KIND, f)
    z = FlatDistribution(6, range(0, 64, 3))
    chk = ensemble_to_condenser_check(ens, z)
    assert chk.measured == 0.0 and chk.holds


def test_one_bad_seed_of_four(rng):
    good = [BitMatrix.identity(6)] * 3
    f = LinearCondenser.from_matrices(CondenserParams(6, 2, 6, 6, 0.0), good + [BitMatrix.zeros(6, 6)])
    ens = build_ensemble(F_KIND, f)
    z = FlatDistribution(6, rng.choice(64, size=16, replace=False))
    chk = ensemble_to_condenser_check(ens, z)
    assert chk.gamma == pytest.approx(0.25) and chk.eps_dec == 0.0
    assert chk.measured <= 2 * chk.eps_dec + chk.gamma + 1e-12


@pytest.mark.parametrize("m", [3, 4, 5])
def test_converse_on_random_flat_sources(m, rng):
    ens = build_ensemble(F_KIND, linear_hash_family(9, 6, kind="lossless"))
    for _ in range(3):
        z = FlatDistribution(9, rng.choice(512, size=1 << m, replace=False))
        assert ensemble_to_condenser_check(ens, z).holds


@pytest.mark.parametrize("rule", [CONFUSABLE, DECODER])
def test_flat_noise_census_small(rule, rng):
    ens = build_ensemble(F_KIND, linear_hash_family(10, 7, kind="lossless"))
    for z in (FlatDistribution(10, rng.choice(1024, size=16, replace=False)), FlatDistribution(10, range(16))):
        assert flat_noise_census(ens, z, rule).holds


def test_mixture_census_small():
    n = 9
    ens = build_ensemble(F_KIND, linear_hash_family(n, 8, kind="lossless"))
    comps = [(0.6, FlatDistribution(n, weight_class(n, 1))), (0.4, FlatDistribution(n, weight_class(n, 0)))]
    comps.sort(key=lambda c: -len(c[1].outcomes))
    res = mixture_noise_census(ens, comps)
    assert res.holds
    dec = ensemble_error_profile(ens, comps, DECODER)
    assert np.all(dec <= res.profile + 1e-12)
    with pytest.raises(ValueError):
        mixture_noise_census(ens, comps[::-1])


def test_profile_needs_parity_ensemble():
    from condcodes.ensembles import G_KIND

    ens = build_ensemble(G_KIND, linear_hash_family(6, 3))
    with pytest.raises(ValueError):
        ensemble_error_profile(ens, point_mass(6))
    with pytest.raises(ValueError):
        error_profile(zero_condenser(4, 2), NoiseModel.from_distribution(point_mass(4)), "bogus")
