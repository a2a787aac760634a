"""Concatenation of a Reed-Solomon outer code with an ensemble of inner codes.

Outer symbols live in GF(2^k) and are packed into ``k`` bits in the
polynomial basis (low coefficient at low bit).  Outer position ``i`` is
encoded by inner code ``i`` of the ensemble, and the ``i``-th inner block
occupies bits ``[i n, (i + 1) n)`` of the concatenated codeword.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import stats

from .channels import BEC, BSC, Channel, rng_stream, transmit
from .condensers import condenser_from_json, linear_hash_family
from .decoders import erasure_decode, tuned_brute_force_decode
from .ensembles import G_KIND, CodeEnsemble, build_ensemble
from .field import ExtField
from .gf2 import rank_of_ints
from .probability import clopper_pearson


# ---------------------------------------------------------------------------
# linear algebra over GF(2^w)


def gf_solve(field: ExtField, a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """One solution of ``a u = b`` over the field (free variables zero), or None."""
    mul = field.mul_table.astype(np.int64)
    inv = field.inv_table
    rows, cols = a.shape
    m = np.concatenate([np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)[:, None]], axis=1)
    pivots = []
    r = 0
    for c in range(cols):
        nz = np.flatnonzero(m[r:, c])
        if len(nz) == 0:
            continue
        p = r + nz[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] = mul[inv[m[r, c]], m[r]]
        factors = m[:, c].copy()
        factors[r] = 0
        m ^= mul[factors[:, None], m[r][None, :]]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if np.any(m[r:, cols]):
        return None
    u = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        u[c] = m[i, cols]
    return u


def _powers(field: ExtField, points: Sequence[int], count: int) -> np.ndarray:
    """``out[i, j] = points[i] ** j``."""
    mul = field.mul_table.astype(np.int64)
    pts = np.asarray(points, dtype=np.int64)
    out = np.zeros((len(pts), max(count, 1)), dtype=np.int64)
    out[:, 0] = 1
    for j in range(1, count):
        out[:, j] = mul[out[:, j - 1], pts]
    return out[:, :count]


def _poly_divmod(field: ExtField, num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Long division of coefficient arrays (low degree first); ``den`` monic-free."""
    mul = field.mul_table.astype(np.int64)
    num = num.copy()
    d = int(np.flatnonzero(den).max())
    lead_inv = int(field.inv_table[den[d]])
    q = np.zeros(max(len(num) - d, 1), dtype=np.int64)
    for i in range(len(num) - 1, d - 1, -1):
        if num[i]:
            c = int(mul[num[i], lead_inv])
            q[i - d] = c
            num[i - d : i + 1] ^= mul[c, den[: d + 1]]
    return q, num[:d]


# ---------------------------------------------------------------------------
# Reed-Solomon


@dataclass(frozen=True)
class ReedSolomonCode:
    """Evaluation code on the first ``s`` field elements in numeric order."""

    field: ExtField
    s: int
    k_prime: int

    def __post_init__(self):
        if not 1 <= self.k_prime <= self.s <= self.field.order:
            raise ValueError(f"need 1 <= k' <= s <= {self.field.order}, got k'={self.k_prime}, s={self.s}")

    @property
    def points(self) -> range:
        return range(self.s)

    @property
    def distance(self) -> int:
        return self.s - self.k_prime + 1

    @property
    def radius(self) -> int:
        return (self.s - self.k_prime) // 2

    @property
    def rate(self) -> float:
        return self.k_prime / self.s

    @cached_property
    def vandermonde(self) -> np.ndarray:
        return _powers(self.field, self.points, self.k_prime)

    @cached_property
    def _bw_powers(self) -> np.ndarray:
        return _powers(self.field, self.points, self.radius + self.k_prime + self.radius + 1)

    @cached_property
    def _interp(self) -> np.ndarray:
        """Inverse Vandermonde on the first ``k'`` points, column by column."""
        v = self.vandermonde[: self.k_prime]
        cols = []
        for j in range(self.k_prime):
            e = np.zeros(self.k_prime, dtype=np.int64)
            e[j] = 1
            cols.append(gf_solve(self.field, v, e))
        return np.stack(cols, axis=1)

    @cached_property
    def check_matrix(self) -> np.ndarray:
        """Rows spanning the dual code: ``H c = 0`` exactly for codewords.

        The first ``k'`` columns of the generator are an invertible
        Vandermonde block, so each later column gives one kernel vector.
        """
        gen = self.vandermonde.T                         # k' x s
        head = gen[:, : self.k_prime]
        rows = []
        for f in range(self.k_prime, self.s):
            vec = np.zeros(self.s, dtype=np.int64)
            vec[: self.k_prime] = gf_solve(self.field, head, gen[:, f])
            vec[f] = 1
            rows.append(vec)
        return np.array(rows, dtype=np.int64).reshape(len(rows), self.s)

    def encode(self, message: Sequence[int]) -> np.ndarray:
        return rs_encode(self, message)

    def is_codeword(self, word: Sequence[int]) -> bool:
        if self.k_prime == self.s:
            return True
        mul = self.field.mul_table.astype(np.int64)
        w = np.asarray(word, dtype=np.int64)
        return not np.any(np.bitwise_xor.reduce(mul[self.check_matrix, w[None, :]], axis=1))

    def message_of(self, codeword: Sequence[int]) -> np.ndarray:
        """Coefficients of the polynomial behind a codeword."""
        mul = self.field.mul_table.astype(np.int64)
        y = np.asarray(codeword, dtype=np.int64)[: self.k_prime]
        return np.bitwise_xor.reduce(mul[self._interp, y[None, :]], axis=1)


def rs_encode(code: ReedSolomonCode, message: Sequence[int]) -> np.ndarray:
    """Evaluate ``sum_j m_j X^j`` at every evaluation point."""
    msg = np.asarray(message, dtype=np.int64)
    if len(msg) != code.k_prime:
        raise ValueError(f"message has {len(msg)} symbols, need {code.k_prime}")
    mul = code.field.mul_table.astype(np.int64)
    return np.bitwise_xor.reduce(mul[code.vandermonde, msg[None, :]], axis=1)


def rs_decode(code: ReedSolomonCode, received: Sequence[int]) -> np.ndarray | None:
    """Unique decoding up to ``radius`` symbol errors (Berlekamp-Welch).

    Solves ``Q(a_i) = y_i E(a_i)`` with ``E`` monic of degree ``radius`` and
    ``deg Q < radius + k'``; returns ``Q / E`` when it divides exactly and
    agrees with at least ``s - radius`` positions, else None.
    """
    y = np.asarray(received, dtype=np.int64)
    if len(y) != code.s:
        raise ValueError(f"received word has {len(y)} symbols, need {code.s}")
    if code.is_codeword(y):
        return code.message_of(y)
    t, k = code.radius, code.k_prime
    if t == 0:
        return None
    mul = code.field.mul_table.astype(np.int64)
    pw = code._bw_powers
    a = np.concatenate([pw[:, : t + k], mul[y[:, None], pw[:, :t]]], axis=1)
    b = mul[y, pw[:, t]]
    sol = gf_solve(code.field, a, b)
    if sol is None:
        return None
    q = sol[: t + k]
    e = np.concatenate([sol[t + k :], [1]])
    p, rem = _poly_divmod(code.field, q, e)
    if np.any(rem) or np.any(p[k:]):
        return None
    p = np.concatenate([p, np.zeros(max(0, k - len(p)), dtype=np.int64)])[:k]
    if np.count_nonzero(rs_encode(code, p) != y) > t:
        return None
    return p


# ---------------------------------------------------------------------------
# concatenation


def pack_symbols(symbols: Sequence[int], width: int) -> int:
    out = 0
    for i, v in enumerate(symbols):
        out |= int(v) << (i * width)
    return out


def unpack_symbols(x: int, width: int, count: int) -> list[int]:
    mask = (1 << width) - 1
    return [(x >> (i * width)) & mask for i in range(count)]


class ConcatenatedCode:
    """Outer RS code with inner code ``i`` of an ensemble at position ``i``.

    Ensembles larger than ``s`` are cut to their numerically-first ``s``
    seeds.
    """

    def __init__(self, outer: ReedSolomonCode, inner: CodeEnsemble):
        if len(inner) < outer.s:
            raise ValueError(f"ensemble has {len(inner)} codes, outer length is {outer.s}")
        if len(inner) > outer.s:
            inner = inner.restrict(range(outer.s))
        self.outer = outer
        self.inner = inner
        self.codes = [inner.code(u) for u in range(outer.s)]
        ks = {c.k for c in self.codes}
        if ks != {outer.field.w}:
            raise ValueError(f"inner dimensions {sorted(ks)} must equal the symbol width {outer.field.w}")

    @property
    def n(self) -> int:
        return self.inner.n

    @property
    def k(self) -> int:
        return self.outer.field.w

    @property
    def s(self) -> int:
        return self.outer.s

    @property
    def block_length(self) -> int:
        return self.n * self.s

    @property
    def dimension(self) -> int:
        return self.k * self.outer.k_prime

    @property
    def rate(self) -> float:
        return self.dimension / self.block_length

    def to_json(self) -> str:
        return json.dumps(
            {
                "condenser": json.loads(self.inner.condenser.to_json()),
                "ensemble": self.inner.kind,
                "w": self.outer.field.w,
                "modulus": self.outer.field.modulus,
                "s": self.s,
                "k_prime": self.outer.k_prime,
            }
        )

    @classmethod
    def from_json(cls, text) -> "ConcatenatedCode":
        obj = json.loads(text) if isinstance(text, str) else text
        cond = condenser_from_json(json.dumps(obj["condenser"]))
        field = ExtField(int(obj["w"]), int(obj["modulus"]))
        ens = build_ensemble(obj["ensemble"], cond, check_claim=False)
        return cls(ReedSolomonCode(field, int(obj["s"]), int(obj["k_prime"])), ens)


def justesen_code(n: int, k: int, s: int, k_prime: int) -> ConcatenatedCode:
    """Inner codes from the rank-repaired linear hash family ``GF(2^n) -> k`` bits."""
    ens = build_ensemble(G_KIND, linear_hash_family(n, k, kind="extractor"))
    return ConcatenatedCode(ReedSolomonCode(ExtField.standard(k), s, k_prime), ens)


def concat_encode(cc: ConcatenatedCode, message: int) -> int:
    if message >> cc.dimension:
        raise ValueError(f"message longer than {cc.dimension} bits")
    symbols = unpack_symbols(message, cc.k, cc.outer.k_prime)
    outer = rs_encode(cc.outer, symbols)
    return pack_symbols([code.encode(int(v)) for code, v in zip(cc.codes, outer)], cc.n)


def encoding_matrix_rank(cc: ConcatenatedCode) -> int:
    return rank_of_ints(concat_encode(cc, 1 << j) for j in range(cc.dimension))


def to_hex(bits: int, length: int) -> str:
    return format(bits, "0{}x".format((length + 3) // 4))


def from_hex(text: str) -> int:
    return int(text, 16)


@dataclass(frozen=True)
class ConcatDecode:
    message: int | None
    inner_symbols: list[int]

    @property
    def ok(self) -> bool:
        return self.message is not None


def inner_decode(cc: ConcatenatedCode, received: int, erased: int = 0, components=None) -> tuple[list[int], list[bool]]:
    """Step 1: one outer symbol estimate per inner block, plus failure flags."""
    mask = (1 << cc.n) - 1
    symbols, failed = [], []
    for i, code in enumerate(cc.codes):
        y = (received >> (i * cc.n)) & mask
        if components is None:
            res = erasure_decode(code, y, (erased >> (i * cc.n)) & mask)
            symbols.append(res.estimate)
        else:
            res = tuned_brute_force_decode(code, y, components)
            symbols.append(erasure_decode(code, res.estimate, 0).estimate if res.ok else 0)
        failed.append(not res.ok)
    return symbols, failed


def naive_decode(cc: ConcatenatedCode, received: int, erased: int = 0, components=None) -> ConcatDecode:
    """Decode every inner block, then the outer code.

    Erasure channels use elimination for the inner blocks; additive noise
    uses the tuned brute-force decoder over ``components``.
    """
    symbols, _ = inner_decode(cc, received, erased, components)
    msg = rs_decode(cc.outer, symbols)
    return ConcatDecode(None if msg is None else pack_symbols(msg, cc.k), symbols)


# ---------------------------------------------------------------------------
# experiment


@dataclass(frozen=True)
class ConcatExperiment:
    trials: int
    block_errors: int
    block_error_ci: tuple[float, float]
    inner_failures: int                   # failed inner blocks over all trials
    inner_failure_ci: tuple[float, float]
    per_position: np.ndarray              # failure count per outer position
    histogram: np.ndarray                 # trials by number of failed inner blocks
    radius: int
    tail_observed: float                  # trials with more than ``radius`` failed blocks
    tail_predicted: float                 # same, from independent per-position rates
    tail_ci: tuple[float, float]

    @property
    def block_error_rate(self) -> float:
        return self.block_errors / self.trials if self.trials else 0.0

    @property
    def inner_failure_rate(self) -> float:
        total = self.trials * len(self.per_position)
        return self.inner_failures / total if total else 0.0

    @property
    def tail_consistent(self) -> bool:
        lo, hi = self.tail_ci
        return lo - 1e-12 <= self.tail_predicted <= hi + 1e-12


def poisson_binomial_sf(rates: Sequence[float], threshold: int) -> float:
    """``Pr[sum of independent Bernoulli(rates) > threshold]``."""
    pmf = np.array([1.0])
    for p in rates:
        pmf = np.convolve(pmf, [1 - p, p])
    return float(pmf[threshold + 1 :].sum())


def concat_error_experiment(
    cc: ConcatenatedCode, channel: Channel, trials: int, master_seed: int, components=None
) -> ConcatExperiment:
    """Monte-Carlo block error of naive decoding with per-block failure logging.

    A block fails when its decoder reports failure or its decoded symbol
    differs from the transmitted one.
    The tail check compares the fraction of trials with more than ``radius``
    failed blocks to the tail of independent blocks at the measured
    per-position failure rates.
    """
    if channel.kind not in (BEC, BSC):
        raise ValueError("concatenation experiments run over BEC or BSC")
    if channel.kind == BSC and components is None:
        raise ValueError("BSC decoding needs noise components")
    s, n = cc.s, cc.n
    per_pos = np.zeros(s, dtype=np.int64)
    hist = np.zeros(s + 1, dtype=np.int64)
    block_errors = 0
    for trial in range(trials):
        rng = rng_stream(master_seed, trial)
        msg = pack_symbols(rng.integers(0, 1 << cc.k, size=cc.outer.k_prime), cc.k)
        outer = rs_encode(cc.outer, unpack_symbols(msg, cc.k, cc.outer.k_prime))
        received = erased = 0
        for i, code in enumerate(cc.codes):
            out = transmit(channel, code.encode(int(outer[i])), n, rng)
            received |= out.data << (i * n)
            erased |= out.erased << (i * n)
        symbols, failed = inner_decode(cc, received, erased, components if channel.kind == BSC else None)
        wrong = (np.asarray(symbols) != outer) | np.asarray(failed)
        per_pos += wrong
        hist[int(wrong.sum())] += 1
        dec = rs_decode(cc.outer, symbols)
        block_errors += dec is None or pack_symbols(dec, cc.k) != msg
    radius = cc.outer.radius
    tail_count = int(hist[radius + 1 :].sum())
    rates = per_pos / trials if trials else np.zeros(s)
    return ConcatExperiment(
        trials,
        block_errors,
        clopper_pearson(block_errors, trials) if trials else (0.0, 1.0),
        int(per_pos.sum()),
        clopper_pearson(int(per_pos.sum()), trials * s) if trials else (0.0, 1.0),
        per_pos,
        hist,
        radius,
        tail_count / trials if trials else 0.0,
        poisson_binomial_sf(rates, radius),
        clopper_pearson(tail_count, trials) if trials else (0.0, 1.0),
    )


def binomial_tail(s: int, eta: float, radius: int) -> float:
    """Tail of ``Bin(s, eta)`` above ``radius``."""
    return float(stats.binom.sf(radius, s, eta))
