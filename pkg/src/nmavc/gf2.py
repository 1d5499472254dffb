"""Bit-packed GF(2) linear algebra and a linear erasure code on top.

Matrix rows are Python ints; bit ``i`` of a row is the entry in column
``i``, so a row operation is a single XOR and desk-scale widths
(n <= 64) fit one machine word per row.

The erasure code follows the reconstruction-set discipline: the decoder
picks the lexicographically least set R of m non-erased columns whose
generator submatrix G_R is invertible and outputs y_R * G_R^{-1}.  The
choice of R depends only on the erasure pattern, never on received bit
values.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import BudgetExceededError, InvalidInstanceError

ERASURE_CHAR = "e"


def bits_to_int(bits: str) -> int:
    """Pack a bitstring; bit i of the result is bits[i]."""
    value = 0
    for i, ch in enumerate(bits):
        if ch == "1":
            value |= 1 << i
        elif ch != "0":
            raise ValueError(f"not a bitstring: {bits!r}")
    return value


def int_to_bits(value: int, n: int) -> str:
    return "".join("1" if (value >> i) & 1 else "0" for i in range(n))


def xor_bits(a: str, b: str) -> str:
    if len(a) != len(b):
        raise ValueError("length mismatch")
    return "".join("1" if x != y else "0" for x, y in zip(a, b))


@dataclass(frozen=True)
class GF2Matrix:
    """Dense matrix over GF(2) with bit-packed integer rows."""

    rows: tuple[int, ...]
    ncols: int

    def __post_init__(self):
        if self.ncols < 0:
            raise ValueError("negative column count")
        mask = (1 << self.ncols) - 1
        for row in self.rows:
            if row < 0 or row & ~mask:
                raise ValueError("row has bits outside the column range")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @classmethod
    def from_rows(cls, rows: Sequence, ncols: Optional[int] = None) -> "GF2Matrix":
        """Build from row bitstrings or sequences of 0/1 ints."""
        packed = []
        width = ncols
        for row in rows:
            if isinstance(row, str):
                bits = row
            else:
                bits = "".join(str(int(v) & 1) for v in row)
            if width is None:
                width = len(bits)
            elif len(bits) != width:
                raise ValueError("ragged rows")
            packed.append(bits_to_int(bits))
        if width is None:
            raise ValueError("cannot infer width of an empty matrix")
        return cls(tuple(packed), width)

    @classmethod
    def identity(cls, n: int) -> "GF2Matrix":
        return cls(tuple(1 << i for i in range(n)), n)

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "GF2Matrix":
        return cls((0,) * nrows, ncols)

    def entry(self, i: int, j: int) -> int:
        return (self.rows[i] >> j) & 1

    def row_strings(self) -> list[str]:
        return [int_to_bits(row, self.ncols) for row in self.rows]

    def vec_mul(self, u: int) -> int:
        """Row vector times matrix: bit i of u selects row i."""
        acc = 0
        for i, row in enumerate(self.rows):
            if (u >> i) & 1:
                acc ^= row
        return acc

    def matmul(self, other: "GF2Matrix") -> "GF2Matrix":
        if self.ncols != other.nrows:
            raise ValueError("dimension mismatch")
        return GF2Matrix(tuple(other.vec_mul(row) for row in self.rows), other.ncols)

    def transpose(self) -> "GF2Matrix":
        cols = []
        for j in range(self.ncols):
            col = 0
            for i, row in enumerate(self.rows):
                if (row >> j) & 1:
                    col |= 1 << i
            cols.append(col)
        return GF2Matrix(tuple(cols), self.nrows)

    def submatrix_columns(self, cols: Sequence[int]) -> "GF2Matrix":
        new_rows = []
        for row in self.rows:
            packed = 0
            for new_j, j in enumerate(cols):
                if (row >> j) & 1:
                    packed |= 1 << new_j
            new_rows.append(packed)
        return GF2Matrix(tuple(new_rows), len(cols))

    def rank(self) -> int:
        work = list(self.rows)
        rank = 0
        for col in range(self.ncols):
            pivot = None
            for r in range(rank, len(work)):
                if (work[r] >> col) & 1:
                    pivot = r
                    break
            if pivot is None:
                continue
            work[rank], work[pivot] = work[pivot], work[rank]
            for r in range(len(work)):
                if r != rank and (work[r] >> col) & 1:
                    work[r] ^= work[rank]
            rank += 1
            if rank == len(work):
                break
        return rank

    def to_json(self) -> dict:
        return {"rows": self.row_strings()}

    @classmethod
    def from_json(cls, obj) -> "GF2Matrix":
        if not isinstance(obj, dict) or "rows" not in obj:
            raise InvalidInstanceError('matrix JSON must be {"rows": [...]}')
        return cls.from_rows(obj["rows"])


@dataclass(frozen=True)
class SingularReport:
    """Returned instead of an inverse when the matrix is singular."""

    rank: int


def gf2_invert(a: GF2Matrix):
    """Invert a square matrix by Gauss-Jordan; SingularReport on failure."""
    n = a.nrows
    if a.ncols != n:
        raise ValueError("inverse of a non-square matrix")
    # Augment each row with the identity in bits n..2n-1.
    work = [a.rows[i] | (1 << (n + i)) for i in range(n)]
    rank = 0
    for col in range(n):
        pivot = None
        for r in range(rank, n):
            if (work[r] >> col) & 1:
                pivot = r
                break
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        for r in range(n):
            if r != rank and (work[r] >> col) & 1:
                work[r] ^= work[rank]
        rank += 1
    if rank < n:
        return SingularReport(rank=rank)
    mask = (1 << n) - 1
    inverse_rows = [0] * n
    for r in range(n):
        # After full elimination row r has a single 1 in some left column.
        col = (work[r] & mask).bit_length() - 1
        inverse_rows[col] = work[r] >> n
    return GF2Matrix(tuple(inverse_rows), n)


def rank_of_columns(g: GF2Matrix, cols: Iterable[int]) -> int:
    return g.submatrix_columns(tuple(cols)).rank()


def ecc_encode(g: GF2Matrix, u: str) -> str:
    """Codeword u*G for a message bitstring u of length m."""
    if len(u) != g.nrows:
        raise ValueError(f"message length {len(u)} != {g.nrows}")
    return int_to_bits(g.vec_mul(bits_to_int(u)), g.ncols)


def erasure_set(y: str) -> frozenset[int]:
    """Positions of erased symbols in a word over {0,1,e}."""
    bad = set(y) - {"0", "1", ERASURE_CHAR}
    if bad:
        raise ValueError(f"invalid symbols {bad} in erased word {y!r}")
    return frozenset(i for i, ch in enumerate(y) if ch == ERASURE_CHAR)


@dataclass(frozen=True)
class ReconstructionSet:
    """An m-subset R of non-erased columns with invertible G_R."""

    indices: tuple[int, ...]
    inverse: GF2Matrix


@dataclass(frozen=True)
class DecodeResult:
    message: str
    reconstruction: ReconstructionSet


_RECONSTRUCTION_CACHE: dict = {}


def select_reconstruction(
    g: GF2Matrix, erased: frozenset[int]
) -> Optional[ReconstructionSet]:
    """Lexicographically least reconstruction set for an erasure pattern.

    Greedy Gaussian elimination over columns [n] \\ E in increasing index
    order; depends only on the erasure pattern.  Returns None when fewer
    than m independent columns survive.
    """
    erased_mask = 0
    for i in erased:
        erased_mask |= 1 << i
    key = (g, erased_mask)
    if key in _RECONSTRUCTION_CACHE:
        return _RECONSTRUCTION_CACHE[key]
    m = g.nrows
    chosen: list[int] = []
    basis: list[int] = []  # column vectors packed over rows, reduced
    for j in range(g.ncols):
        if (erased_mask >> j) & 1:
            continue
        col = 0
        for i in range(m):
            if (g.rows[i] >> j) & 1:
                col |= 1 << i
        reduced = col
        for vec in basis:
            low = vec & (-vec)
            if reduced & low:
                reduced ^= vec
        if reduced:
            basis.append(reduced)
            chosen.append(j)
            if len(chosen) == m:
                break
    if len(chosen) < m:
        result = None
    else:
        sub = g.submatrix_columns(chosen)
        inverse = gf2_invert(sub)
        if isinstance(inverse, SingularReport):  # pragma: no cover - greedy guarantees
            raise AssertionError("greedy selection produced a singular submatrix")
        result = ReconstructionSet(tuple(chosen), inverse)
    _RECONSTRUCTION_CACHE[key] = result
    return result


def ecc_decode(
    g: GF2Matrix, y: str, max_erasures: Optional[int] = None
) -> Optional[DecodeResult]:
    """Reconstruction-set decoder; None stands for the failure output.

    With max_erasures set, words with more erasures are rejected before
    any reconstruction is attempted (the error-detection variant).
    """
    if len(y) != g.ncols:
        raise ValueError(f"word length {len(y)} != {g.ncols}")
    erased = erasure_set(y)
    if max_erasures is not None and len(erased) > max_erasures:
        return None
    recon = select_reconstruction(g, erased)
    if recon is None:
        return None
    packed = 0
    for new_j, j in enumerate(recon.indices):
        if y[j] == "1":
            packed |= 1 << new_j
    message = int_to_bits(recon.inverse.vec_mul(packed), g.nrows)
    return DecodeResult(message, recon)


def delta_exact(g: GF2Matrix, p_star: Fraction, budget: int = 20) -> Fraction:
    """Exact decoding-failure probability under per-bit erasure p_star.

    Sums p^{|E|} (1-p)^{n-|E|} over the 2^n erasure patterns E for which
    the surviving columns of G have rank below m.
    """
    n = g.ncols
    m = g.nrows
    if n > budget:
        raise BudgetExceededError(
            f"delta_exact enumerates 2^{n} erasure patterns, above the "
            f"budget of 2^{budget}; use delta_monte_carlo instead"
        )
    p = Fraction(p_star)
    if p < 0 or p > 1:
        raise InvalidInstanceError(f"erasure probability {p} outside [0,1]")
    q = 1 - p
    p_pow = [Fraction(1)] * (n + 1)
    q_pow = [Fraction(1)] * (n + 1)
    for i in range(1, n + 1):
        p_pow[i] = p_pow[i - 1] * p
        q_pow[i] = q_pow[i - 1] * q
    failure = Fraction(0)
    for mask in range(1 << n):
        erased_count = bin(mask).count("1")
        if erased_count > n - m:
            failed = True
        else:
            survivors = [j for j in range(n) if not (mask >> j) & 1]
            failed = rank_of_columns(g, survivors) < m
        if failed:
            failure += p_pow[erased_count] * q_pow[n - erased_count]
    return failure


def delta_monte_carlo(
    g: GF2Matrix, p_star: Fraction, trials: int, seed: int
) -> tuple[float, float]:
    """Monte-Carlo estimate of the decoding-failure probability.

    Returns (estimate, 95% normal-approximation half-width).  Erasure
    patterns are drawn with the counter-based Philox generator so the
    result is deterministic given the seed and independent of chunking.
    """
    if trials < 1:
        raise InvalidInstanceError("trials must be >= 1")
    n = g.ncols
    m = g.nrows
    p = float(Fraction(p_star))
    rng = np.random.Generator(np.random.Philox(seed))
    draws = rng.random((trials, n)) < p
    weights = (1 << np.arange(n)).astype(np.int64)
    masks = draws @ weights
    failure_by_mask: dict[int, bool] = {}
    failures = 0
    for mask in masks:
        mask = int(mask)
        failed = failure_by_mask.get(mask)
        if failed is None:
            if bin(mask).count("1") > n - m:
                failed = True
            else:
                survivors = [j for j in range(n) if not (mask >> j) & 1]
                failed = rank_of_columns(g, survivors) < m
            failure_by_mask[mask] = failed
        if failed:
            failures += 1
    estimate = failures / trials
    ci95 = 1.96 * (estimate * (1.0 - estimate) / trials) ** 0.5
    return estimate, ci95


def min_distance(g: GF2Matrix) -> int:
    """Minimum distance by exhaustive codeword enumeration (m <= 12)."""
    m = g.nrows
    if m > 12:
        raise BudgetExceededError("min_distance enumerates 2^m codewords; m <= 12")
    best = g.ncols + 1
    for u in range(1, 1 << m):
        weight = bin(g.vec_mul(u)).count("1")
        if weight < best:
            best = weight
    return best


def single_parity(m: int) -> GF2Matrix:
    """[I_m | 1]: appends one even-parity bit."""
    rows = tuple((1 << i) | (1 << m) for i in range(m))
    return GF2Matrix(rows, m + 1)


def hamming_7_4() -> GF2Matrix:
    """Systematic Hamming(7,4) generator."""
    return GF2Matrix.from_rows(
        [
            "1000110",
            "0100101",
            "0010011",
            "0001111",
        ]
    )


def random_full_rank(m: int, n: int, seed_or_rng) -> GF2Matrix:
    """Seeded random m x n generator matrix of full row rank."""
    if m > n:
        raise InvalidInstanceError(f"full row rank needs m <= n, got {m} x {n}")
    rng = (
        seed_or_rng
        if isinstance(seed_or_rng, random.Random)
        else random.Random(seed_or_rng)
    )
    while True:
        rows = tuple(rng.getrandbits(n) for _ in range(m))
        g = GF2Matrix(rows, n)
        if g.rank() == m:
            return g
