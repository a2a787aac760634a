import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from condcodes.field import (
    IRREDUCIBLE_MODULI,
    ExtField,
    FieldPoly,
    gf2_poly_mod,
    is_irreducible,
    is_irreducible_gf2,
    poly_powmod,
    standard_irreducible,
)
from condcodes.gf2 import (
    BitMatrix,
    InconsistentSystem,
    rank,
    right_kernel_basis,
    solve_affine,
)


# -- oracles ---------------------------------------------------------------

def naive_rank(arr):
    """Textbook row reduction on a numpy copy, mod 2."""
    a = np.array(arr, dtype=np.int64) % 2
    m, n = a.shape
    r = 0
    for c in range(n):
        rows = [i for i in range(r, m) if a[i, c]]
        if not rows:
            continue
        a[[r, rows[0]]] = a[[rows[0], r]]
        for i in range(m):
            if i != r and a[i, c]:
                a[i] = (a[i] + a[r]) % 2
        r += 1
    return r


def schoolbook_mul(a, b, modulus, w):
    """Multiply bit lists then reduce by long division."""
    ab = [0] * (2 * w)
    for i in range(w):
        for j in range(w):
            ab[i + j] ^= ((a >> i) & 1) & ((b >> j) & 1)
    mod = [(modulus >> i) & 1 for i in range(w + 1)]
    for d in range(2 * w - 1, w - 1, -1):
        if ab[d]:
            for i in range(w + 1):
                ab[d - w + i] ^= mod[i]
    return sum(bit << i for i, bit in enumerate(ab[:w]))


def trial_division_irreducible(f):
    w = f.bit_length() - 1
    for d in range(2, 1 << (w // 2 + 1)):
        if d.bit_length() - 1 >= 1 and d.bit_length() - 1 <= w // 2 and gf2_poly_mod(f, d) == 0:
            return False
    return True


# -- BitMatrix --------------------------------------------------------------

def test_rank_trivial():
    assert rank(BitMatrix.identity(3)) == 3
    assert rank(BitMatrix.from_array([[1, 1], [1, 1]])) == 1


def test_rank_matches_oracle(rng):
    for _ in range(200):
        arr = rng.integers(0, 2, size=(8, 12))
        assert rank(BitMatrix.from_array(arr)) == naive_rank(arr)


@given(st.integers(1, 10), st.integers(1, 10), st.randoms(use_true_random=False))
def test_rank_permutation_invariant(rows, cols, rnd):
    arr = np.array([[rnd.randint(0, 1) for _ in range(cols)] for _ in range(rows)])
    m = BitMatrix.from_array(arr)
    pr = list(range(rows)); rnd.shuffle(pr)
    pc = list(range(cols)); rnd.shuffle(pc)
    assert rank(m) <= min(rows, cols)
    assert rank(m.select_rows(pr).select_columns(pc)) == rank(m)


def test_rank_nullity(rng):
    for _ in range(300):
        r, c = rng.integers(1, 17, size=2)
        m = BitMatrix.random(int(r), int(c), rng)
        k = right_kernel_basis(m)
        assert rank(m) + k.rows == m.cols
        assert rank(k) == k.rows
        assert all(m.mul_vec(v) == 0 for v in k.data)


def test_kernel_coordinate_split():
    n, r = 6, 2
    m = BitMatrix.from_rows([1 << i for i in range(r)], n)
    k = right_kernel_basis(m)
    assert sorted(k.data) == [1 << j for j in range(r, n)]
    assert right_kernel_basis(BitMatrix.identity(5)).rows == 0


def test_solve_affine_trivial():
    x, ker = solve_affine(BitMatrix.identity(5), 0b10110)
    assert x == 0b10110 and ker.rows == 0
    x, ker = solve_affine(BitMatrix.zeros(3, 4), 0)
    assert x == 0 and sorted(ker.data) == [1, 2, 4, 8]
    with pytest.raises(InconsistentSystem):
        solve_affine(BitMatrix.zeros(3, 4), 0b010)


def test_solve_affine_equals_bruteforce(rng):
    for _ in range(150):
        rows, cols = int(rng.integers(1, 9)), int(rng.integers(1, 11))
        a = BitMatrix.random(rows, cols, rng)
        b = int(rng.integers(0, 1 << rows))
        brute = {x for x in range(1 << cols) if a.mul_vec(x) == b}
        try:
            x0, ker = solve_affine(a, b)
        except InconsistentSystem:
            assert not brute
            continue
        span = set()
        for coeffs in range(1 << ker.rows):
            span.add(x0 ^ ker.vec_mul(coeffs))
        assert span == brute
        assert len(brute) == 2 ** (cols - rank(a))


def test_matrix_text_roundtrip(rng):
    m = BitMatrix.random(5, 13, rng)
    text = m.dumps()
    assert text.splitlines()[0] == "5 13"
    assert text.endswith("\n")
    assert all(line == line.lower() for line in text.splitlines())
    assert BitMatrix.loads(text) == m


def test_bit_order_little_endian():
    m = BitMatrix.from_array([[1, 0, 0, 0, 1]])
    assert m.data == (0b10001,)
    assert m.dumps() == "1 5\n11\n"


def test_row_bits_beyond_cols_rejected():
    with pytest.raises(ValueError):
        BitMatrix(1, 2, (0b100,))


def test_transpose_and_products(rng):
    a = BitMatrix.random(4, 7, rng)
    b = BitMatrix.random(7, 3, rng)
    expected = (a.to_array().astype(int) @ b.to_array().astype(int)) % 2
    assert np.array_equal((a @ b).to_array(), expected)
    assert a.T.T == a
    x = int(rng.integers(0, 1 << 7))
    assert a.mul_vec(x) == a.T.vec_mul(x)
    xv = np.array([(x >> j) & 1 for j in range(7)])
    y = (a.to_array().astype(int) @ xv) % 2
    assert a.mul_vec(x) == sum(int(v) << i for i, v in enumerate(y))


# -- fields -------------------------------------------------------------------

def test_table_irreducible_against_trial_division():
    for w in range(1, 13):
        assert trial_division_irreducible(IRREDUCIBLE_MODULI[w])
    assert is_irreducible_gf2(0x13) and not is_irreducible_gf2(0x11)


def test_table_is_lexicographically_least():
    for w in range(1, 11):
        f = IRREDUCIBLE_MODULI[w]
        assert all(not trial_division_irreducible(g) for g in range(1 << w, f))


def test_field_mul_examples():
    f = ExtField(4, 0x13)
    assert f.mul(0x2, 0x8) == 0x3
    for a in f.elements():
        assert f.mul(a, 1) == a and f.mul(a, 0) == 0


@pytest.mark.parametrize("w", range(1, 9))
def test_field_mul_all_pairs(w):
    f = ExtField.standard(w)
    tab = f.mul_table
    for a in range(f.order):
        for b in range(f.order):
            assert tab[a, b] == schoolbook_mul(a, b, f.modulus, w)


def test_group_order(rng):
    for w in (3, 8, 13, 20, 32):
        f = ExtField.standard(w)
        g = int(rng.integers(1, f.order))
        assert f.pow(g, f.order - 1) == 1
        assert f.mul(g, f.inv(g)) == 1


def test_reducible_modulus_rejected():
    with pytest.raises(ValueError):
        ExtField(4, 0x11)


@given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
def test_field_axioms(a, b, c):
    f = ExtField.standard(8)
    assert f.mul(a, b) == f.mul(b, a)
    assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
    assert f.mul(a, b ^ c) == f.mul(a, b) ^ f.mul(a, c)


# -- polynomials --------------------------------------------------------------

def rand_poly(field, deg, rnd):
    return FieldPoly(field, tuple(rnd.randrange(field.order) for _ in range(deg + 1)))


@given(st.randoms(use_true_random=False))
def test_degree_additive(rnd):
    f = ExtField.standard(4)
    a, b = rand_poly(f, rnd.randrange(5), rnd), rand_poly(f, rnd.randrange(5), rnd)
    assert (a * b).degree == a.degree + b.degree
    assert FieldPoly.zero(f).degree == float("-inf")


@given(st.randoms(use_true_random=False))
def test_divmod_identity(rnd):
    f = ExtField.standard(4)
    a = rand_poly(f, rnd.randrange(8), rnd)
    b = rand_poly(f, rnd.randrange(1, 4), rnd)
    if b.is_zero():
        return
    q, r = a.divmod(b)
    assert q * b + r == a
    assert r.degree < b.degree


def test_powmod_trivial():
    f = ExtField.standard(4)
    g = standard_irreducible(f, 3)
    F = FieldPoly(f, (3, 7, 1))
    assert poly_powmod(F, 0, g) == FieldPoly.constant(f, 1)
    c = FieldPoly.constant(f, 0xB)
    for e in (1, 2, 5, 17):
        assert poly_powmod(c, e, g) == FieldPoly.constant(f, f.pow(0xB, e))


@given(st.randoms(use_true_random=False), st.integers(0, 64))
def test_powmod_matches_repeated_multiplication(rnd, e):
    f = ExtField.standard(4)
    G = rand_poly(f, rnd.randrange(1, 5), rnd)
    if G.is_zero():
        return
    F = rand_poly(f, rnd.randrange(6), rnd)
    acc = FieldPoly.constant(f, 1)
    for _ in range(e):
        acc = acc * F
    expected = acc % G
    got = poly_powmod(F, e, G)
    assert got == expected
    assert got.degree < G.degree


def test_poly_irreducibility_bruteforce():
    """Degree <= 3 polynomials over GF(4) are irreducible iff root-free."""
    f = ExtField.standard(2)
    for coeffs in itertools.product(range(4), repeat=3):
        g = FieldPoly(f, tuple(coeffs) + (1,))
        has_root = any(g(z) == 0 for z in f.elements())
        assert is_irreducible(g) == (not has_root)


def test_standard_irreducible_over_extension():
    for w, deg in [(4, 3), (8, 3), (4, 2), (2, 4)]:
        f = ExtField.standard(w)
        g = standard_irreducible(f, deg)
        assert g.degree == deg and is_irreducible(g)
