"""Seeded linear condensers and exact checks of their guarantees.

A condenser here is a list of ``r x n`` GF(2) matrices indexed by seed.
Matrices are kept column-wise (column ``j`` is the image of ``e_j`` packed
as an ``r``-bit int), which makes evaluating a whole source against every
seed a vectorised XOR.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .field import ExtField, FieldPoly, is_irreducible, poly_powmod, standard_irreducible
from .gf2 import BitMatrix, rank, rank_of_ints, right_kernel_basis
from .probability import (
    EXACT_MAX_BITS,
    FiniteDistribution,
    FlatDistribution,
)

EXTRACTOR = "extractor"
LOSSLESS = "lossless"


@dataclass(frozen=True)
class CondenserParams:
    n: int
    d: float
    r: int
    m: float
    epsilon: float
    kind: str = LOSSLESS

    def __post_init__(self):
        if self.kind not in (EXTRACTOR, LOSSLESS):
            raise ValueError(f"unknown condenser kind {self.kind!r}")
        if not (0 <= self.r and 0 < self.n):
            raise ValueError("bad dimensions")

    def hash_claim_consistent(self) -> bool:
        """Whether (r, m, eps) sit where the hashing bound applies (slack 2 log 1/eps)."""
        if self.epsilon <= 0:
            return False
        slack = 2 * math.log2(1 / self.epsilon)
        if self.kind == EXTRACTOR:
            return self.r <= self.m - slack + 1e-9
        return self.r >= self.m + slack - 1e-9


class LinearCondenser:
    """``f(x, z) = M_z x`` for a finite list of seeds.

    ``column_fn(z)`` returns the ``n`` columns of ``M_z``; results are cached
    so each seed is materialised at most once.
    """

    def __init__(
        self,
        params: CondenserParams,
        column_fn: Callable[[int], Sequence[int]],
        num_seeds: int,
        descriptor: dict | None = None,
    ):
        if num_seeds < 1:
            raise ValueError("need at least one seed")
        self.params = params
        self.num_seeds = num_seeds
        self.descriptor = dict(descriptor or {})
        self._column_fn = column_fn
        self._cols: dict[int, tuple[int, ...]] = {}
        self._table: np.ndarray | None = None

    @classmethod
    def from_matrices(cls, params: CondenserParams, matrices: Sequence[BitMatrix], descriptor=None):
        cols = [tuple(mat.columns()) for mat in matrices]
        for mat in matrices:
            if mat.shape != (params.r, params.n):
                raise ValueError(f"matrix shape {mat.shape} != {(params.r, params.n)}")
        return cls(params, cols.__getitem__, len(cols), descriptor)

    # -- basic accessors --------------------------------------------------
    @property
    def n(self) -> int:
        return self.params.n

    @property
    def r(self) -> int:
        return self.params.r

    @property
    def d(self) -> float:
        return math.log2(self.num_seeds)

    def seeds(self) -> range:
        return range(self.num_seeds)

    def columns(self, z: int) -> tuple[int, ...]:
        if not 0 <= z < self.num_seeds:
            raise IndexError(f"seed {z} outside [0, {self.num_seeds})")
        if z not in self._cols:
            cols = tuple(int(c) for c in self._column_fn(z))
            if len(cols) != self.n or any(c >> self.r for c in cols):
                raise ValueError(f"seed {z}: bad column data")
            self._cols[z] = cols
        return self._cols[z]

    def matrix_for_seed(self, z: int) -> BitMatrix:
        return BitMatrix.from_columns(self.columns(z), self.r)

    def evaluate(self, x: int, z: int) -> int:
        out = 0
        for j, c in enumerate(self.columns(z)):
            if (x >> j) & 1:
                out ^= c
        return out

    def column_table(self) -> np.ndarray:
        """``(num_seeds, n)`` array of columns."""
        if self._table is None:
            self._table = np.array([self.columns(z) for z in self.seeds()], dtype=np.int64).reshape(
                self.num_seeds, self.n
            )
        return self._table

    def evaluate_all(self, xs) -> np.ndarray:
        """``f(x, z)`` for every seed (rows) and every ``x`` (columns)."""
        xs = np.asarray(xs, dtype=np.int64)
        table = self.column_table()
        out = np.zeros((self.num_seeds, len(xs)), dtype=np.int64)
        for j in range(self.n):
            hit = ((xs >> j) & 1).astype(bool)
            if hit.any():
                out[:, hit] ^= table[:, j : j + 1]
        return out

    def restrict(self, seeds: Sequence[int]) -> "LinearCondenser":
        """Sub-family on the listed seeds, renumbered from zero."""
        seeds = list(seeds)
        params = CondenserParams(self.n, math.log2(len(seeds)), self.r, self.params.m, self.params.epsilon, self.params.kind)
        desc = dict(self.descriptor, seeds=len(seeds))
        return LinearCondenser(params, lambda i: self.columns(seeds[i]), len(seeds), desc)

    def map_matrices(self, fn: Callable[[BitMatrix], BitMatrix], r: int | None = None) -> "LinearCondenser":
        """Apply ``fn`` to every seed's matrix (lazily)."""
        r = self.r if r is None else r
        params = CondenserParams(self.n, self.params.d, r, self.params.m, self.params.epsilon, self.params.kind)
        return LinearCondenser(params, lambda z: fn(self.matrix_for_seed(z)).columns(), self.num_seeds, self.descriptor)

    def to_json(self) -> str:
        p = self.params
        obj = {"kind": p.kind, "n": p.n, "d": p.d, "r": p.r, "m": p.m, "epsilon": p.epsilon}
        obj.update(self.descriptor)
        return json.dumps(obj, sort_keys=True)

    def __repr__(self) -> str:
        c = self.descriptor.get("construction", "explicit")
        return f"LinearCondenser({c}, n={self.n}, r={self.r}, seeds={self.num_seeds})"


# ---------------------------------------------------------------------------
# constructions


def linear_hash_family(n: int, r: int, m: float | None = None, epsilon: float = 0.0, kind: str = EXTRACTOR) -> LinearCondenser:
    """``h_a(x)`` = first ``r`` coordinates of ``a * x`` in ``GF(2^n)``."""
    if not 1 <= r <= n:
        raise ValueError("need 1 <= r <= n")
    fld = ExtField.standard(n)
    mask = (1 << r) - 1

    def cols(alpha: int) -> list[int]:
        return [c & mask for c in fld.mul_matrix(alpha)]

    params = CondenserParams(n, n, r, float(r if m is None else m), epsilon, kind)
    desc = {"construction": "linear-hash", "modulus": format(fld.modulus, "x")}
    return LinearCondenser(params, cols, fld.order, desc)


@dataclass(frozen=True)
class GuvParams:
    w: int
    n_bar: int
    r_bar: int
    h: int

    @property
    def q(self) -> int:
        return 1 << self.w


def _pack_symbols(symbols: Sequence[int], w: int) -> int:
    return sum(int(s) << (i * w) for i, s in enumerate(symbols))


def _unpack_symbols(x: int, w: int, count: int) -> list[int]:
    mask = (1 << w) - 1
    return [(x >> (i * w)) & mask for i in range(count)]


def guv_output(f: LinearCondenser, x: int, z: int) -> int:
    """Evaluate ``(F(z), F_1(z), ...)`` straight from the polynomials.

    This skips the per-seed matrix entirely, so it serves as a reference for
    the linearised form.
    """
    desc = f.descriptor
    fld = ExtField(desc["w"], int(desc["modulus"], 16))
    modulus = FieldPoly(fld, tuple(int(c, 16) for c in desc["poly_modulus"]))
    params = GuvParams(desc["w"], desc["n_bar"], desc["r_bar"], desc["h"])
    F = FieldPoly(fld, tuple(_unpack_symbols(x, fld.w, params.n_bar)))
    out = []
    Fi = F % modulus
    for i in range(params.r_bar):
        if i:
            Fi = poly_powmod(Fi, params.h, modulus)
        out.append(Fi(z))
    return _pack_symbols(out, fld.w)


def guv_condenser(
    w: int,
    n_bar: int,
    r_bar: int,
    h: int,
    m: float | None = None,
    epsilon: float = 0.0,
    modulus: FieldPoly | None = None,
) -> LinearCondenser:
    """Guruswami-Umans-Vadhan condenser over ``GF(2^w)``, flattened to bits.

    Input is ``n_bar`` symbols (coefficients of ``F``, low degree first, each
    symbol ``w`` bits), the seed is one field element and the output is
    ``r_bar`` symbols.  ``h`` must be a power of two, so that ``F -> F^h``
    is additive and each fixed-seed map is GF(2)-linear.
    """
    if h < 2 or h & (h - 1):
        raise ValueError("h must be a power of two (>= 2) for GF(2)-linearity")
    if not 1 <= r_bar <= n_bar:
        raise ValueError("need 1 <= r_bar <= n_bar")
    fld = ExtField.standard(w)
    if modulus is None:
        G = standard_irreducible(fld, n_bar)
    else:
        G = modulus
        if G.field != fld or G.degree != n_bar or not is_irreducible(G):
            raise ValueError(f"modulus must be irreducible of degree {n_bar} over GF(2^{w})")
    n_bits = w * n_bar

    # F_i for every basis input bit does not depend on the seed
    basis_polys = []
    for j in range(n_bits):
        F = FieldPoly(fld, tuple(_unpack_symbols(1 << j, w, n_bar))) % G
        chain = [F]
        for _ in range(1, r_bar):
            chain.append(poly_powmod(chain[-1], h, G))
        basis_polys.append(chain)

    def cols(z: int) -> list[int]:
        return [_pack_symbols([Fi(z) for Fi in chain], w) for chain in basis_polys]

    params = CondenserParams(n_bits, w, w * r_bar, float(w * r_bar if m is None else m), epsilon, LOSSLESS)
    desc = {
        "construction": "guv",
        "w": w,
        "n_bar": n_bar,
        "r_bar": r_bar,
        "h": h,
        "modulus": format(fld.modulus, "x"),
        "poly_modulus": [format(c, "x") for c in G.coeffs],
    }
    return LinearCondenser(params, cols, fld.order, desc)


def truncation_condenser(n: int, r: int) -> LinearCondenser:
    """Single-seed ``[I_r | 0]``."""
    params = CondenserParams(n, 0, r, float(r), 0.0, EXTRACTOR)
    cols = [1 << j if j < r else 0 for j in range(n)]
    return LinearCondenser(params, lambda z: cols, 1, {"construction": "truncation"})


def zero_condenser(n: int, r: int, seeds: int = 1) -> LinearCondenser:
    params = CondenserParams(n, math.log2(seeds), r, 0.0, 0.0, LOSSLESS)
    return LinearCondenser(params, lambda z: [0] * n, seeds, {"construction": "zero"})


def condenser_from_json(text: str) -> LinearCondenser:
    obj = json.loads(text) if isinstance(text, str) else text
    kind = obj.get("kind", LOSSLESS)
    eps = float(obj.get("epsilon", 0.0))
    c = obj.get("construction")
    if c == "linear-hash":
        return linear_hash_family(int(obj["n"]), int(obj["r"]), obj.get("m"), eps, kind)
    if c == "guv":
        return guv_condenser(int(obj["w"]), int(obj["n_bar"]), int(obj["r_bar"]), int(obj["h"]), obj.get("m"), eps)
    if c == "truncation":
        return truncation_condenser(int(obj["n"]), int(obj["r"]))
    raise ValueError(f"unknown construction {c!r}")


# ---------------------------------------------------------------------------
# exact verification


def _check_feasible(f: LinearCondenser, support_size: int) -> None:
    if support_size * f.num_seeds > (1 << EXACT_MAX_BITS):
        raise ValueError(
            f"exact enumeration needs |supp X| * seeds <= 2^{EXACT_MAX_BITS} "
            f"(got {support_size} * {f.num_seeds}); use the Monte-Carlo harness instead"
        )


def per_seed_closeness(f: LinearCondenser, x: FiniteDistribution, m_prime: float) -> np.ndarray:
    """For every seed, closeness of ``f(X, z)`` to min-entropy ``m'``."""
    if x.n != f.n:
        raise ValueError(f"source lives on {x.n} bits, condenser takes {f.n}")
    if m_prime > f.r + 1e-12:
        raise ValueError(f"target {m_prime} exceeds output length {f.r}")
    _check_feasible(f, len(x.outcomes))
    images = f.evaluate_all(x.outcomes)
    seeds = np.repeat(np.arange(f.num_seeds, dtype=np.int64), len(x.outcomes))
    keys = (seeds << f.r) | images.ravel()
    uniq, inv = np.unique(keys, return_inverse=True)
    mass = np.bincount(inv, weights=np.tile(x.probs, f.num_seeds))
    excess = np.clip(mass - 2.0 ** (-m_prime), 0.0, None)
    return np.bincount(uniq >> f.r, weights=excess, minlength=f.num_seeds)


def verify_condenser(f: LinearCondenser, x: FiniteDistribution, m_prime: float) -> float:
    """Closeness of ``(Z, f(X, Z))`` to min-entropy ``d + m'``, by enumeration.

    The joint cap ``2^-(d+m')`` splits evenly over seeds, so the joint
    excess is the seed-average of the fixed-seed excesses.
    """
    return float(per_seed_closeness(f, x, m_prime).mean())


@dataclass(frozen=True)
class SeedCensus:
    epsilon: float          # the joint error the census is run against
    measured: float         # measured joint error on this source
    delta: float
    threshold: float        # eps / delta
    fraction_bad: float
    per_seed: np.ndarray = field(repr=False, compare=False)

    @property
    def claim_verified(self) -> bool:
        return self.measured <= self.epsilon + 1e-12

    @property
    def holds(self) -> bool:
        """All but a ``delta`` fraction of seeds are ``eps/delta``-good."""
        return (not self.claim_verified) or self.fraction_bad <= self.delta + 1e-12


def seed_census(f: LinearCondenser, x: FiniteDistribution, m_prime: float, delta: float, epsilon: float | None = None) -> SeedCensus:
    per = per_seed_closeness(f, x, m_prime)
    measured = float(per.mean())
    eps = measured if epsilon is None else epsilon
    thr = eps / delta
    bad = float(np.mean(per > thr + 1e-12))
    return SeedCensus(eps, measured, delta, thr, bad, per)


def _sub_supports(support: np.ndarray, size: int, samples: int, rng: np.random.Generator) -> Iterable[np.ndarray]:
    yield support[:size]
    yield support[-size:]
    for _ in range(samples):
        yield np.sort(rng.choice(support, size=size, replace=False))


def verify_lossless_monotone(
    f: LinearCondenser,
    x: FlatDistribution,
    m_values: Iterable[int] | None = None,
    samples: int = 6,
    seed: int = 0,
) -> dict[int, float]:
    """Worst lossless error over flat sub-sources of each size ``2^{m'}``.

    Sub-supports are the first and last ``2^{m'}`` outcomes plus ``samples``
    seeded random subsets, so the result is deterministic.
    """
    m_top = int(math.floor(math.log2(len(x.outcomes)) + 1e-9))
    m_values = range(m_top + 1) if m_values is None else m_values
    rng = np.random.default_rng(seed)
    out = {}
    for mp in m_values:
        size = 1 << mp
        if size > len(x.outcomes):
            raise ValueError(f"source too small for m' = {mp}")
        worst = 0.0
        for sub in _sub_supports(x.outcomes, size, samples if size < len(x.outcomes) else 0, rng):
            worst = max(worst, verify_condenser(f, FlatDistribution(x.n, sub), mp))
        out[mp] = worst
    return out


# ---------------------------------------------------------------------------
# affine sources and duality


@dataclass(frozen=True)
class AffineSource:
    """Uniform on ``{x A + a : x in F_2^m}``; ``A`` has full row rank."""

    basis: BitMatrix
    shift: int = 0

    def __post_init__(self):
        if rank(self.basis) != self.basis.rows:
            raise ValueError("affine source basis must have full row rank")

    @property
    def n(self) -> int:
        return self.basis.cols

    @property
    def dim(self) -> int:
        return self.basis.rows

    def points(self) -> list[int]:
        return [self.basis.vec_mul(c) ^ self.shift for c in range(1 << self.dim)]

    def distribution(self) -> FlatDistribution:
        return FlatDistribution(self.n, self.points())

    def dual(self, shift: int = 0) -> "AffineSource":
        """Uniform on a translate of the orthogonal complement."""
        return AffineSource(right_kernel_basis(self.basis), shift)


def image_dimension(g: BitMatrix, src: AffineSource) -> int:
    """``rank(G A^T)``: dimension of the image of the source under ``G``."""
    return rank(g @ src.basis.T)


def flat_closeness(dim: int, target: float) -> float:
    """Closeness of a flat ``2^dim``-point distribution to min-entropy ``target``."""
    return max(0.0, 1.0 - 2.0 ** (dim - target))


@dataclass(frozen=True)
class AffineImage:
    dimension: int
    enumerated_dimension: float
    closeness_full: float       # to min-entropy r
    closeness_source: float     # to min-entropy m (nan when m > r)

    @property
    def dichotomy_holds(self) -> bool:
        vals = [self.closeness_full]
        if not math.isnan(self.closeness_source):
            vals.append(self.closeness_source)
        return all(v == 0 or v >= 0.5 for v in vals)


def affine_image_check(g: BitMatrix, src: AffineSource) -> AffineImage:
    """Image of an affine source under a linear map, by rank and by enumeration."""
    if g.cols != src.n:
        raise ValueError("matrix and source disagree on n")
    dim = image_dimension(g, src)
    image = {g.mul_vec(p) for p in src.points()}
    enum_dim = math.log2(len(image))
    if enum_dim != dim:
        raise AssertionError(f"rank says {dim}, enumeration says {enum_dim}")
    d = FlatDistribution(g.rows, image) if g.rows else None
    full = 0.0 if d is None else float(np.clip(d.probs - 2.0 ** -g.rows, 0, None).sum())
    src_close = math.nan
    if src.dim <= g.rows:
        src_close = float(np.clip(d.probs - 2.0 ** -src.dim, 0, None).sum()) if d is not None else 0.0
    return AffineImage(dim, enum_dim, full, src_close)


@dataclass(frozen=True)
class DualityVerdict:
    n: int
    r: int
    m: int
    m_prime: int
    premise: bool           # rank(G A_G^T) >= m'
    primal_rank: int        # rank(G A_G^T)
    dual_rank: int          # rank(H A_H^T)
    bound: int              # n - m + m' - r

    @property
    def holds(self) -> bool:
        return (not self.premise) or self.dual_rank >= self.bound


def duality_check(g: BitMatrix, src: AffineSource, m_prime: int) -> DualityVerdict:
    """Dual matrix on the dual source keeps at least ``n - m + m' - r`` dimensions."""
    n, r = g.cols, g.rows
    if rank(g) != r:
        raise ValueError("G must have full row rank")
    h = right_kernel_basis(g)
    dual = src.dual()
    assert (dual.basis @ src.basis.T).is_zero()
    primal = image_dimension(g, src)
    dual_rank = image_dimension(h, dual)
    return DualityVerdict(n, r, src.dim, m_prime, primal >= m_prime, primal, dual_rank, n - src.dim + m_prime - r)


def dual_family(f: LinearCondenser) -> LinearCondenser:
    """Per-seed kernel duals ``g(., z)`` of a surjective family ``f``."""
    n, r = f.n, f.r

    def cols(z: int):
        m = f.matrix_for_seed(z)
        if rank(m) != r:
            raise ValueError(f"seed {z}: matrix not surjective, no dual of rank n - r")
        return right_kernel_basis(m).columns()

    params = CondenserParams(n, f.params.d, n - r, float(n - r), f.params.epsilon, LOSSLESS)
    return LinearCondenser(params, cols, f.num_seeds, {"construction": "dual"})


def check_dual_pair(f: LinearCondenser, g: LinearCondenser) -> None:
    if f.n != g.n or f.num_seeds != g.num_seeds or f.r + g.r != f.n:
        raise ValueError("families are not dual: shapes disagree")
    for z in f.seeds():
        a, b = f.matrix_for_seed(z), g.matrix_for_seed(z)
        if rank(a) != a.rows or rank(b) != b.rows or not (a @ b.T).is_zero():
            raise ValueError(f"seed {z}: matrices are not surjective kernel duals")


def seed_image_dimensions(f: LinearCondenser, src: AffineSource) -> np.ndarray:
    """``rank(M_z A^T)`` for every seed, from the images of the basis rows."""
    imgs = f.evaluate_all(list(src.basis.data))
    return np.array([rank_of_ints(int(v) for v in row) for row in imgs], dtype=np.int64)


def affine_joint_closeness(f: LinearCondenser, src: AffineSource, target: float) -> float:
    """Seeded closeness on an affine source via per-seed image ranks."""
    dims = seed_image_dimensions(f, src)
    return float(np.mean(np.clip(1.0 - np.exp2(dims - target), 0.0, None)))


def coordinate_sources(n: int, dim: int) -> list[AffineSource]:
    """All sources uniform on a ``dim``-subset of coordinates."""
    out = []
    for idx in itertools.combinations(range(n), dim):
        out.append(AffineSource(BitMatrix.from_rows([1 << i for i in idx], n)))
    return out


def all_subspaces(n: int, dim: int) -> Iterable[AffineSource]:
    """Every ``dim``-dimensional subspace of ``F_2^n``, once each (via RREF)."""
    for pivots in itertools.combinations(range(n), dim):
        free = [[c for c in range(p + 1, n) if c not in pivots] for p in pivots]
        slots = [(i, c) for i, cs in enumerate(free) for c in cs]
        for bits in range(1 << len(slots)):
            rows = [1 << p for p in pivots]
            for b, (i, c) in enumerate(slots):
                if (bits >> b) & 1:
                    rows[i] |= 1 << c
            yield AffineSource(BitMatrix.from_rows(rows, n))


def gaussian_binomial(n: int, k: int) -> int:
    num, den = 1, 1
    for i in range(k):
        num *= (1 << (n - i)) - 1
        den *= (1 << (i + 1)) - 1
    return num // den


@dataclass(frozen=True)
class DualityScan:
    sources: int
    max_gap: float                 # largest |eps_f - eps_g| over sources
    worst_f: float
    worst_g: float
    iff_holds: bool                # on every eps in the grid

    @property
    def holds(self) -> bool:
        return self.iff_holds and self.max_gap <= 1e-12


def dual_condenser_scan(
    f: LinearCondenser,
    g: LinearCondenser,
    m: int,
    m_prime: int,
    sources: Iterable[AffineSource],
    eps_grid: Sequence[float] = (0.0, 0.05, 0.1, 0.25, 0.49),
    enumerate_check: bool = False,
) -> DualityScan:
    """``f`` is an ``m -> m'`` affine condenser iff ``g`` is ``n-m -> n-m+m'-r``.

    Both sides are measured on every listed ``m``-dimensional source and its
    dual.  With ``enumerate_check`` the rank shortcut is cross-checked against
    full joint enumeration.
    """
    check_dual_pair(f, g)
    n, r = f.n, f.r
    if not (m_prime <= m <= n and m_prime <= r):
        raise ValueError("need m' <= m <= n and m' <= r")
    target_g = n - m + m_prime - r
    gap = worst_f = worst_g = 0.0
    count = 0
    for src in sources:
        if src.dim != m:
            raise ValueError("source dimension differs from m")
        dual = src.dual()
        ef = affine_joint_closeness(f, src, m_prime)
        eg = affine_joint_closeness(g, dual, target_g) if target_g >= 0 else 0.0
        if enumerate_check:
            ef2 = verify_condenser(f, src.distribution(), m_prime)
            eg2 = verify_condenser(g, dual.distribution(), max(target_g, 0))
            if abs(ef - ef2) > 1e-12 or abs(eg - eg2) > 1e-12:
                raise AssertionError("rank shortcut disagrees with enumeration")
        gap = max(gap, abs(ef - eg))
        worst_f, worst_g = max(worst_f, ef), max(worst_g, eg)
        count += 1
    iff = all((worst_f <= e + 1e-12) == (worst_g <= e + 1e-12) for e in eps_grid)
    return DualityScan(count, gap, worst_f, worst_g, iff)
