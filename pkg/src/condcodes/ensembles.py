"""Code ensembles built from seeded linear condensers.

Ensemble F uses each seed's matrix as a parity-check matrix; ensemble G uses
it as a generator matrix (after rank repair).  Erasure patterns are bit
masks over ``[n]``: bit ``j`` set means position ``j`` was erased.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .condensers import EXTRACTOR, LOSSLESS, AffineSource, LinearCondenser, verify_condenser
from .gf2 import BitMatrix, echelon, rank, rank_of_ints, right_kernel_basis
from .probability import clopper_pearson

F_KIND = "F"
G_KIND = "G"


def repair_rank(m: BitMatrix) -> BitMatrix:
    """Make ``m`` full row rank with the least disturbance.

    Rows are scanned top to bottom; a row that depends on the rows kept so
    far is replaced by the first unit vector ``e_j`` that raises the rank.
    """
    if m.rows > m.cols:
        raise ValueError(f"cannot reach rank {m.rows} with {m.cols} columns")
    kept: list[int] = []
    for row in m.data:
        if rank_of_ints(kept + [row]) > len(kept):
            kept.append(row)
            continue
        for j in range(m.cols):
            if rank_of_ints(kept + [1 << j]) > len(kept):
                kept.append(1 << j)
                break
    return BitMatrix(m.rows, m.cols, tuple(kept))


@dataclass(frozen=True, eq=False)
class LinearCode:
    """Binary linear code given by a generator or a parity-check matrix."""

    n: int
    generator_matrix: BitMatrix | None = None
    parity_matrix: BitMatrix | None = None
    _erasure_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.generator_matrix is None and self.parity_matrix is None:
            raise ValueError("need a generator or a parity-check matrix")
        for m in (self.generator_matrix, self.parity_matrix):
            if m is not None and m.cols != self.n:
                raise ValueError(f"matrix has {m.cols} columns, block length is {self.n}")
        g = self.generator_matrix
        if g is not None and rank(g) != g.rows:
            raise ValueError("generator must have full row rank")

    @classmethod
    def from_generator(cls, g: BitMatrix) -> "LinearCode":
        return cls(g.cols, generator_matrix=g)

    @classmethod
    def from_parity(cls, h: BitMatrix) -> "LinearCode":
        return cls(h.cols, parity_matrix=h)

    @cached_property
    def generator(self) -> BitMatrix:
        if self.generator_matrix is not None:
            return self.generator_matrix
        return right_kernel_basis(self.parity_matrix)

    @cached_property
    def parity(self) -> BitMatrix:
        if self.parity_matrix is not None:
            return self.parity_matrix
        return right_kernel_basis(self.generator_matrix)

    @property
    def k(self) -> int:
        return self.generator.rows

    @property
    def rate(self) -> float:
        return self.k / self.n

    def encode(self, message: int) -> int:
        return self.generator.vec_mul(message)

    def syndrome(self, y: int) -> int:
        return self.parity.mul_vec(y)

    def is_codeword(self, y: int) -> bool:
        return self.syndrome(y) == 0

    def codewords(self) -> list[int]:
        if self.k > 20:
            raise ValueError("too many codewords to list")
        return [self.encode(x) for x in range(1 << self.k)]

    # -- erasures ---------------------------------------------------------
    def erasure_solver(self, erased: int):
        """Cached ``(rank, pivots, position masks)`` for recovering messages.

        The system is ``x G_S = y_S`` over unerased positions ``S``.  For
        pivot ``i`` the message bit ``pivots[i]`` is the parity of ``y`` on
        ``masks[i]``; free message bits are set to zero.
        """
        if erased not in self._erasure_cache:
            keep = [j for j in range(self.n) if not (erased >> j) & 1]
            gt = self.generator.T.select_rows(keep)          # |S| x k
            ech = echelon(gt)
            masks = []
            for t in ech.transform[: ech.rank]:
                mask = 0
                for i, j in enumerate(keep):
                    if (t >> i) & 1:
                        mask |= 1 << j
                masks.append(mask)
            checks = []
            for t in ech.transform[ech.rank :]:
                checks.append(sum(1 << keep[i] for i in range(len(keep)) if (t >> i) & 1))
            self._erasure_cache[erased] = (ech.rank, ech.pivots, tuple(masks), tuple(checks))
        return self._erasure_cache[erased]

    def dumps(self, form: str = "generator") -> str:
        if form == "generator":
            return f"code {self.n} {self.k}\n" + self.generator.dumps()
        return f"code-parity {self.n} {self.parity.rows}\n" + self.parity.dumps()

    @classmethod
    def loads(cls, text: str) -> "LinearCode":
        head, body = text.split("\n", 1)
        tag, n, _ = head.split()
        m = BitMatrix.loads(body)
        if tag == "code":
            return cls(int(n), generator_matrix=m)
        if tag == "code-parity":
            return cls(int(n), parity_matrix=m)
        raise ValueError(f"unknown code header {head!r}")


def tolerates_erasure(code: LinearCode, erased: int) -> bool:
    """The generator keeps rank ``k`` on the unerased columns."""
    keep = ~erased & ((1 << code.n) - 1)
    return rank_of_ints(r & keep for r in code.generator.data) == code.k


def parity_tolerates_erasure(parity: BitMatrix, erased: int) -> bool:
    """Parity-side test: the columns of ``H`` on the erased set are independent."""
    cols = parity.columns()
    picked = [cols[j] for j in range(parity.cols) if (erased >> j) & 1]
    return rank_of_ints(picked) == len(picked)


class CodeEnsemble:
    """One code per seed of a condenser, materialised on demand."""

    def __init__(self, kind: str, condenser: LinearCondenser):
        if kind not in (F_KIND, G_KIND):
            raise ValueError(f"ensemble kind must be F or G, not {kind!r}")
        self.kind = kind
        self.condenser = condenser
        self._codes: dict[int, LinearCode] = {}

    @property
    def n(self) -> int:
        return self.condenser.n

    def __len__(self) -> int:
        return self.condenser.num_seeds

    def seeds(self) -> range:
        return self.condenser.seeds()

    def matrix(self, u: int) -> BitMatrix:
        """Parity matrix (F) or rank-repaired generator (G) of code ``u``."""
        m = self.condenser.matrix_for_seed(u)
        return m if self.kind == F_KIND else repair_rank(m)

    def code(self, u: int) -> LinearCode:
        if u not in self._codes:
            m = self.matrix(u)
            self._codes[u] = LinearCode.from_parity(m) if self.kind == F_KIND else LinearCode.from_generator(m)
        return self._codes[u]

    def codes(self) -> Iterable[LinearCode]:
        return (self.code(u) for u in self.seeds())

    def restrict(self, seeds: Sequence[int]) -> "CodeEnsemble":
        return CodeEnsemble(self.kind, self.condenser.restrict(seeds))

    def tolerance_table(self, patterns: Sequence[int]) -> np.ndarray:
        """Boolean ``(seeds, patterns)`` table of erasure tolerance."""
        return np.stack([tolerance_row(self, u, patterns) for u in self.seeds()])


def build_ensemble(kind: str, condenser: LinearCondenser, check_claim: bool = True) -> CodeEnsemble:
    if check_claim:
        want = LOSSLESS if kind == F_KIND else EXTRACTOR
        if condenser.params.kind != want:
            raise ValueError(f"ensemble {kind} needs a {want}-claimed condenser, got {condenser.params.kind}")
    return CodeEnsemble(kind, condenser)


def tolerance_census(ens: CodeEnsemble, erased: int) -> float:
    """Fraction of codes in the ensemble that tolerate the pattern."""
    return float(ens.tolerance_table([erased]).mean())


def coordinate_source(n: int, positions: int) -> AffineSource:
    """Uniform on the coordinates in the ``positions`` mask, zero elsewhere."""
    rows = [1 << j for j in range(n) if (positions >> j) & 1]
    return AffineSource(BitMatrix.from_rows(rows, n))


def pattern_epsilon(ens: CodeEnsemble, erased: int) -> float:
    """Measured condenser error on the bit-fixing source attached to ``S``.

    F: lossless error of ``f`` on the source uniform on ``S``.  G: extractor
    error of the original (unrepaired) ``g`` on the source uniform on the
    complement of ``S``.
    """
    n = ens.n
    full = (1 << n) - 1
    if ens.kind == F_KIND:
        if erased == 0:
            return 0.0
        src = coordinate_source(n, erased)
        return verify_condenser(ens.condenser, src.distribution(), min(src.dim, ens.condenser.r))
    keep = full & ~erased
    if keep == 0:
        return 1.0 - 2.0 ** -ens.condenser.r
    src = coordinate_source(n, keep)
    return verify_condenser(ens.condenser, src.distribution(), ens.condenser.r)


@dataclass(frozen=True)
class ErasureCensus:
    patterns: np.ndarray
    intolerant: np.ndarray          # fraction of codes failing each pattern
    epsilon: np.ndarray             # measured error per pattern

    @property
    def worst_epsilon(self) -> float:
        return float(self.epsilon.max())

    def holds(self, factor: float = 3.0) -> bool:
        """Intolerant fraction <= factor * eps for every pattern."""
        return bool(np.all(self.intolerant <= factor * self.epsilon + 1e-12))


def patterns_up_to(n: int, m: int) -> list[int]:
    return [s for s in range(1 << n) if s.bit_count() <= m]


def erasure_census(ens: CodeEnsemble, patterns: Sequence[int]) -> ErasureCensus:
    table = ens.tolerance_table(patterns)
    eps = np.array([pattern_epsilon(ens, s) for s in patterns])
    return ErasureCensus(np.asarray(patterns), 1.0 - table.mean(axis=0), eps)


@dataclass(frozen=True)
class PatternCensus:
    failures: np.ndarray            # per code
    trials: int
    threshold: float
    fraction_good: float
    required: float

    @property
    def holds(self) -> bool:
        return self.fraction_good >= self.required - 1e-12


def random_pattern_census(
    ens: CodeEnsemble,
    sampler: Callable[[np.random.Generator], int],
    trials: int,
    rng: np.random.Generator,
    epsilon: float,
    slack: float = 0.0,
) -> PatternCensus:
    """Monte-Carlo failure rate of every code on sampled erasure patterns.

    A code counts as good when its failure rate is consistent with at most
    ``sqrt(3 eps) + slack`` (the exact 95% lower confidence bound on its
    failure rate does not exceed that level).
    """
    thr = math.sqrt(3 * epsilon) + slack
    fails = np.zeros(len(ens), dtype=np.int64)
    for u in ens.seeds():
        pats = [sampler(rng) for _ in range(trials)]
        fails[u] = int((~tolerance_row(ens, u, pats)).sum())
    good = 0
    for f in fails:
        lo, _ = clopper_pearson(int(f), trials)
        good += lo <= thr
    required = 1 - math.sqrt(3 * epsilon)
    return PatternCensus(fails, trials, thr, good / len(ens), required)


def tolerance_row(ens: CodeEnsemble, u: int, patterns: Sequence[int]) -> np.ndarray:
    if ens.kind == F_KIND:
        cols = ens.condenser.columns(u)
        return np.array(
            [rank_of_ints([cols[j] for j in range(ens.n) if (s >> j) & 1]) == s.bit_count() for s in patterns],
            dtype=bool,
        )
    code = ens.code(u)
    return np.array([tolerates_erasure(code, s) for s in patterns], dtype=bool)


def change_basis(ens: CodeEnsemble, b: BitMatrix) -> CodeEnsemble:
    """Ensemble whose seed matrices are right-multiplied by invertible ``b``."""
    if rank(b) != b.rows or b.rows != b.cols:
        raise ValueError("basis change must be invertible")
    return CodeEnsemble(ens.kind, ens.condenser.map_matrices(lambda m: m @ b))
