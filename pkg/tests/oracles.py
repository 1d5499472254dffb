"""Independent oracles for the test suite.

These re-derive quantities by deliberately different routes than the
library (event maximization, bounded-denominator grids, subset
enumeration, big-integer arithmetic) so a defect cannot hide on both
sides of a check.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from itertools import combinations

from nmavc import FiniteDistribution, apply_copy


def add_fractions_bigint(a: int, b: int, c: int, d: int) -> tuple[int, int]:
    """a/b + c/d in lowest terms, via raw big-integer arithmetic."""
    num = a * d + c * b
    den = b * d
    g = math.gcd(num, den)
    if den < 0:
        g = -g
    return num // g, den // g


def sd_event_oracle(p: FiniteDistribution, q: FiniteDistribution) -> Fraction:
    """Statistical distance as max_S |P(S) - Q(S)| over all events S.

    Exponential in the support size; use on small supports only.
    """
    outcomes = sorted(p.support | q.support, key=repr)
    best = Fraction(0)
    for r in range(len(outcomes) + 1):
        for event in combinations(outcomes, r):
            gap = abs(
                sum((p.probability(o) for o in event), Fraction(0))
                - sum((q.probability(o) for o in event), Fraction(0))
            )
            if gap > best:
                best = gap
    return best


def compositions(total: int, parts: int):
    """All tuples of `parts` non-negative ints summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def grid_simulators(outcomes, max_denominator: int):
    """Every distribution over `outcomes` whose masses share a denominator
    at most `max_denominator`, deduplicated."""
    outcomes = list(outcomes)
    seen = set()
    for q in range(1, max_denominator + 1):
        for combo in compositions(q, len(outcomes)):
            masses = tuple(Fraction(c, q) for c in combo)
            if masses in seen:
                continue
            seen.add(masses)
            yield FiniteDistribution(
                {o: m for o, m in zip(outcomes, masses) if m > 0}
            )


def grid_optimum(tamper_by_message, simulator_outcomes, max_denominator: int) -> Fraction:
    """Best worst-case distance over the bounded-denominator simulator grid."""
    from nmavc import statistical_distance

    best = None
    for d in grid_simulators(simulator_outcomes, max_denominator):
        worst = max(
            statistical_distance(t, apply_copy(d, m))
            for m, t in tamper_by_message.items()
        )
        if best is None or worst < best:
            best = worst
    return best


def lex_min_reconstruction(g, erased) -> tuple[int, ...] | None:
    """First m-subset of surviving columns (in lexicographic order) whose
    submatrix is invertible, by brute-force combination scan."""
    from nmavc.gf2 import rank_of_columns

    survivors = [j for j in range(g.ncols) if j not in erased]
    m = g.nrows
    for cols in combinations(survivors, m):
        if rank_of_columns(g, cols) == m:
            return cols
    return None


def random_distribution(rng: random.Random, outcomes, max_denominator: int = 12):
    """Random exact distribution: q balls thrown into len(outcomes) bins."""
    outcomes = list(outcomes)
    q = rng.randint(1, max_denominator)
    counts = [0] * len(outcomes)
    for _ in range(q):
        counts[rng.randrange(len(outcomes))] += 1
    return FiniteDistribution(
        {o: Fraction(c, q) for o, c in zip(outcomes, counts) if c}
    )


def random_binary_channel(rng: random.Random, max_denominator: int = 12):
    """Random exactly-stochastic 2x2 channel with small denominators."""
    from nmavc import BinaryChannel

    den1 = rng.randint(1, max_denominator)
    den2 = rng.randint(1, max_denominator)
    w11 = Fraction(rng.randint(0, den1), den1)
    w21 = Fraction(rng.randint(0, den2), den2)
    return BinaryChannel.from_rows([[w11, 1 - w11], [w21, 1 - w21]])


def random_extended_channel(rng: random.Random, max_denominator: int = 10):
    """Random extended channel with shared erasure mass."""
    from nmavc import ExtendedChannel

    den = rng.randint(1, max_denominator)
    p = Fraction(rng.randint(0, den - 1) if den > 1 else 0, den)
    rows = []
    for _ in range(2):
        den2 = rng.randint(1, max_denominator)
        w0 = Fraction(rng.randint(0, den2), den2) * (1 - p)
        rows.append([w0, (1 - p) - w0, p])
    return ExtendedChannel.from_rows(rows)
