import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from condcodes.channels import Channel
from condcodes.concat import (
    ConcatenatedCode,
    ReedSolomonCode,
    concat_encode,
    concat_error_experiment,
    encoding_matrix_rank,
    from_hex,
    gf_solve,
    justesen_code,
    naive_decode,
    pack_symbols,
    poisson_binomial_sf,
    rs_decode,
    rs_encode,
    to_hex,
    unpack_symbols,
)
from condcodes.condensers import CondenserParams, LinearCondenser, linear_hash_family
from condcodes.ensembles import G_KIND, build_ensemble
from condcodes.field import ExtField
from condcodes.gf2 import BitMatrix
from condcodes.probability import FlatDistribution, weight_class

GF8 = ExtField.standard(3)
RS73 = ReedSolomonCode(GF8, 7, 3)


def horner(field, coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = field.mul(acc, x) ^ c
    return acc


def all_rs73_codewords():
    return {m: tuple(int(v) for v in rs_encode(RS73, m)) for m in itertools.product(range(8), repeat=3)}


# -- Reed-Solomon ----------------------------------------------------------


def test_rs_parameters():
    assert RS73.distance == 5 and RS73.radius == 2 and RS73.rate == pytest.approx(3 / 7)
    with pytest.raises(ValueError):
        ReedSolomonCode(GF8, 9, 3)
    with pytest.raises(ValueError):
        ReedSolomonCode(GF8, 4, 5)


def test_rs_encode_examples():
    assert list(rs_encode(RS73, [5, 0, 0])) == [5] * 7
    assert list(rs_encode(RS73, [0, 0, 0])) == [0] * 7
    with pytest.raises(ValueError):
        rs_encode(RS73, [1, 2])


@given(st.lists(st.integers(0, 7), min_size=3, max_size=3))
def test_rs_encode_matches_horner(msg):
    assert list(rs_encode(RS73, msg)) == [horner(GF8, msg, a) for a in range(7)]


@given(st.lists(st.integers(0, 7), min_size=3, max_size=3), st.lists(st.integers(0, 7), min_size=3, max_size=3))
def test_rs_encode_linear(a, b):
    lhs = rs_encode(RS73, np.bitwise_xor(a, b))
    assert np.array_equal(lhs, rs_encode(RS73, a) ^ rs_encode(RS73, b))


def test_rs_minimum_distance_exhaustive():
    words = np.array(list(all_rs73_codewords().values()))
    nonzero = words[np.any(words != 0, axis=1)]
    assert np.count_nonzero(nonzero, axis=1).min() == RS73.distance


def test_rs_check_matrix_annihilates_codewords():
    for w in all_rs73_codewords().values():
        assert RS73.is_codeword(w)
    assert not RS73.is_codeword([1, 0, 0, 0, 0, 0, 0])


def test_rs_round_trip_all_messages_and_planted_errors():
    # every message over GF(8), every error pattern of weight <= 2
    positions = [c for w in range(3) for c in itertools.combinations(range(7), w)]
    rng = np.random.default_rng(0)
    for msg, cw in all_rs73_codewords().items():
        for pos in positions:
            y = np.array(cw)
            for p in pos:
                y[p] ^= int(rng.integers(1, 8))
            assert tuple(rs_decode(RS73, y)) == msg


def test_rs_single_error_matches_nearest_codeword():
    book = all_rs73_codewords()
    for c in range(8):
        y = np.array(book[(c, 0, 0)])
        y[4] ^= 3
        dists = {m: sum(a != b for a, b in zip(w, y)) for m, w in book.items()}
        nearest = min(dists, key=dists.get)
        assert tuple(rs_decode(RS73, y)) == nearest == (c, 0, 0)


def test_rs_beyond_radius_decodes_to_nearer_codeword():
    book = all_rs73_codewords()
    a, b = (1, 0, 0), None
    # pick a codeword at distance 5 from a, move 3 symbols of a toward it
    for m, w in book.items():
        if sum(x != y for x, y in zip(w, book[a])) == 5:
            b = m
            break
    y = np.array(book[a])
    diff = [i for i in range(7) if book[a][i] != book[b][i]]
    for i in diff[:3]:
        y[i] = book[b][i]
    assert sum(x != z for x, z in zip(book[b], y)) == 2
    assert tuple(rs_decode(RS73, y)) == b


def test_rs_decode_reports_failure():
    # distance >= 3 from every codeword cannot be decoded
    book = all_rs73_codewords()
    rng = np.random.default_rng(1)
    for _ in range(500):
        y = rng.integers(0, 8, size=7)
        d = min(sum(a != b for a, b in zip(w, y)) for w in book.values())
        out = rs_decode(RS73, y)
        if d > RS73.radius:
            assert out is None
        else:
            assert out is not None


def test_gf_solve_inconsistent():
    a = np.array([[1, 1], [1, 1]])
    assert gf_solve(GF8, a, np.array([1, 2])) is None
    u = gf_solve(GF8, a, np.array([3, 3]))
    assert GF8.mul(1, u[0]) ^ GF8.mul(1, u[1]) == 3


# -- concatenation ---------------------------------------------------------


def small_cc(s=7, k_prime=3):
    ens = build_ensemble(G_KIND, linear_hash_family(5, 3))
    # skip the all-zero seed so every position has a genuine code
    return ConcatenatedCode(ReedSolomonCode(GF8, s, k_prime), ens.restrict(range(1, 1 + s)))


def test_concat_parameters():
    cc = small_cc()
    assert cc.block_length == 35 and cc.dimension == 9
    assert cc.rate == pytest.approx((3 / 5) * (3 / 7))
    with pytest.raises(ValueError):
        ConcatenatedCode(RS73, build_ensemble(G_KIND, linear_hash_family(5, 2)))


def test_concat_ensemble_truncated_to_first_seeds():
    cc = justesen_code(6, 3, 8, 4)
    assert len(cc.inner) == 8
    for i in range(8):
        assert cc.codes[i].generator == build_ensemble(G_KIND, linear_hash_family(6, 3)).code(i).generator


def test_concat_encode_zero_and_linear(rng):
    cc = small_cc()
    assert concat_encode(cc, 0) == 0
    for _ in range(30):
        a, b = (int(v) for v in rng.integers(0, 1 << 9, size=2))
        assert concat_encode(cc, a ^ b) == concat_encode(cc, a) ^ concat_encode(cc, b)


def test_concat_encode_injective():
    cc = small_cc()
    assert encoding_matrix_rank(cc) == cc.dimension
    words = {concat_encode(cc, m) for m in range(1 << 9)}
    assert len(words) == 1 << 9


def test_concat_identity_stub():
    w = 4
    ident = LinearCondenser.from_matrices(CondenserParams(w, 0, w, w, 0.0, "extractor"), [BitMatrix.identity(w)])
    cc = ConcatenatedCode(ReedSolomonCode(ExtField.standard(w), 1, 1), build_ensemble(G_KIND, ident))
    assert all(concat_encode(cc, m) == m for m in range(16))


def test_concat_block_layout():
    cc = small_cc()
    msg = 0b101_011_110
    cw = concat_encode(cc, msg)
    outer = rs_encode(cc.outer, unpack_symbols(msg, 3, 3))
    blocks = unpack_symbols(cw, 5, 7)
    assert blocks == [cc.codes[i].encode(int(outer[i])) for i in range(7)]


def test_naive_decode_noiseless_and_within_radius(rng):
    cc = small_cc()
    for _ in range(20):
        msg = int(rng.integers(0, 1 << 9))
        cw = concat_encode(cc, msg)
        assert naive_decode(cc, cw).message == msg
        # wipe two whole blocks: inner decoding guesses, outer corrects
        erased = (0b11111 << 5) | (0b11111 << 20)
        assert naive_decode(cc, cw & ~erased, erased).message == msg


def test_naive_decode_bsc_components():
    cc = small_cc()
    comps = [FlatDistribution(5, weight_class(5, 0))]
    msg = 0b110_001_011
    cw = concat_encode(cc, msg)
    assert naive_decode(cc, cw, components=comps).message == msg


def test_hex_round_trip():
    cc = small_cc()
    cw = concat_encode(cc, 0b111_000_101)
    text = to_hex(cw, cc.block_length)
    assert len(text) == 9 and from_hex(text) == cw


def test_concat_json_round_trip():
    cc = justesen_code(6, 3, 8, 4)
    back = ConcatenatedCode.from_json(cc.to_json())
    assert all(concat_encode(back, m) == concat_encode(cc, m) for m in range(0, 1 << 12, 97))


def test_pack_unpack():
    assert unpack_symbols(pack_symbols([1, 7, 3], 3), 3, 3) == [1, 7, 3]


def test_poisson_binomial_matches_binomial():
    from scipy import stats

    assert poisson_binomial_sf([0.2] * 10, 3) == pytest.approx(stats.binom.sf(3, 10, 0.2))


# -- experiments -----------------------------------------------------------


def test_experiment_noiseless():
    cc = small_cc()
    res = concat_error_experiment(cc, Channel.bec(0.0), 30, 1)
    assert res.block_errors == 0 and res.inner_failures == 0 and res.histogram[0] == 30


def test_experiment_bsc_all_flipped():
    cc = small_cc()
    comps = [FlatDistribution(5, weight_class(5, i)) for i in (1, 0)]
    res = concat_error_experiment(cc, Channel.bsc(1.0), 10, 2, components=comps)
    assert res.block_error_rate == 1.0 and res.inner_failure_rate == 1.0


def test_experiment_reproducible():
    cc = small_cc()
    a = concat_error_experiment(cc, Channel.bec(0.2), 50, 9)
    b = concat_error_experiment(cc, Channel.bec(0.2), 50, 9)
    assert a.block_errors == b.block_errors and np.array_equal(a.per_position, b.per_position)


def test_experiment_tail_consistency():
    cc = small_cc()
    res = concat_error_experiment(cc, Channel.bec(0.15), 400, 3)
    assert res.histogram.sum() == 400
    assert res.tail_consistent
    # every block error comes from a trial with more than radius wrong symbols
    assert res.block_errors <= res.tail_observed * res.trials
