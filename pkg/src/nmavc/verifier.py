"""The tampering experiment and its exact verification.

Given a stochastic code (randomized encoder with an explicit uniform
seed, deterministic decoder), this module computes the exact decoded
distribution under a tampering function or a channel state sequence,
finds the optimal message-independent simulator distribution by an
exact-rational LP, and checks the bit-family-to-channel transfer: the
mixture simulator built from per-function simulators stays within the
certified bit-family error for every state sequence.

Every reported (epsilon, D) pair is re-verified by direct statistical
distance computation before it is returned.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Union

from .channels import StateSequence
from .distributions import (
    BOT,
    SAME_STAR,
    FiniteDistribution,
    Marker,
    all_bitstrings,
    apply_copy,
    format_rational,
    mix,
    outcome_to_json,
    statistical_distance,
)
from .errors import (
    BudgetExceededError,
    InvalidCodeError,
    InvalidInstanceError,
    VerificationError,
)
from .gf2 import GF2Matrix, ecc_encode, int_to_bits
from .simplex import solve_min
from .tampering import AffineFunction, BITFunction, enumerate_bit_functions

#: Stand-in for the induced map that always reports decoding failure.
BOT_MAP = Marker("bot-map")

TamperingFunction = Union[BITFunction, AffineFunction, Marker]


def thread_count() -> int:
    """Parallelism cap from NMAVC_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("NMAVC_THREADS", "1")))
    except ValueError:
        return 1


class StochasticCode:
    """A (k, n)-coding scheme with a rho-bit uniform encoder seed.

    The encoder maps (message, seed) to a codeword; the decoder is a
    deterministic total map from n-bit words to a message or BOT.
    Perfect correctness (dec(enc(m, r)) = m for every m and seed) is
    audited exhaustively before any verification uses the code.
    """

    __slots__ = ("k", "n", "rho", "enc", "dec", "_audited")

    def __init__(
        self,
        k: int,
        n: int,
        rho: int,
        enc: Callable[[str, int], str],
        dec: Callable[[str], object],
    ) -> None:
        if k < 0 or n < 1 or rho < 0:
            raise InvalidCodeError(f"bad dimensions k={k}, n={n}, rho={rho}")
        self.k = k
        self.n = n
        self.rho = rho
        self.enc = enc
        self.dec = dec
        self._audited = False

    def messages(self) -> list[str]:
        return all_bitstrings(self.k)

    @property
    def seed_count(self) -> int:
        return 1 << self.rho

    def check_correctness(self) -> None:
        """Exhaustive dec(enc(m, r)) = m audit; cached after first pass."""
        if self._audited:
            return
        for m in self.messages():
            for r in range(self.seed_count):
                word = self.enc(m, r)
                if len(word) != self.n:
                    raise InvalidCodeError(
                        f"enc({m!r}, {r}) has length {len(word)}, expected {self.n}"
                    )
                decoded = self.dec(word)
                if decoded != m:
                    raise InvalidCodeError(
                        f"dec(enc({m!r}, {r})) = {decoded!r}, violating "
                        f"perfect correctness"
                    )
        self._audited = True

    @classmethod
    def identity(cls, k: int) -> "StochasticCode":
        if k < 1:
            raise InvalidCodeError("identity code needs k >= 1")
        return cls(k, k, 0, lambda m, r: m, lambda w: w)

    @classmethod
    def linear(cls, g: GF2Matrix) -> "StochasticCode":
        """Deterministic linear code mG with table-inverse decoding."""
        k = g.nrows
        table = {}
        for m in all_bitstrings(k):
            word = ecc_encode(g, m)
            if word in table:
                raise InvalidCodeError("generator matrix is not injective")
            table[word] = m
        return cls(k, g.ncols, 0, lambda m, r: ecc_encode(g, m),
                   lambda w: table.get(w, BOT))

    @classmethod
    def from_tables(
        cls,
        k: int,
        n: int,
        rho: int,
        enc_table: Mapping[str, list[str]],
        dec_table: Mapping[str, str],
    ) -> "StochasticCode":
        enc_rows = {m: tuple(words) for m, words in enc_table.items()}
        dec_map = dict(dec_table)
        expected = set(all_bitstrings(k))
        if set(enc_rows) != expected:
            raise InvalidCodeError("encoder table must cover every message")
        for m, words in enc_rows.items():
            if len(words) != 1 << rho:
                raise InvalidCodeError(
                    f"message {m!r} has {len(words)} codewords, expected 2^{rho}"
                )
        return cls(
            k, n, rho,
            lambda m, r: enc_rows[m][r],
            lambda w: dec_map.get(w, BOT),
        )

    def to_json(self) -> dict:
        enc_table = {}
        dec_table = {}
        for m in self.messages():
            words = [self.enc(m, r) for r in range(self.seed_count)]
            enc_table[m] = words
            for word in words:
                dec_table[word] = m
        # Record any off-image words the decoder maps to a message.
        for word in all_bitstrings(self.n):
            if word not in dec_table:
                decoded = self.dec(word)
                if decoded is not BOT:
                    dec_table[word] = decoded
        return {
            "k": self.k,
            "n": self.n,
            "rho": self.rho,
            "enc": enc_table,
            "dec": dec_table,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "StochasticCode":
        try:
            return cls.from_tables(
                int(obj["k"]), int(obj["n"]), int(obj["rho"]),
                obj["enc"], obj.get("dec", {}),
            )
        except KeyError as missing:
            raise InvalidCodeError(f"code JSON lacks field {missing}") from None


def _check_budget(cost: int, budget: Optional[int], what: str) -> None:
    if budget is not None and cost > budget:
        raise BudgetExceededError(f"{what} needs {cost} evaluations, budget {budget}")


def tamper_distribution_fn(
    code: StochasticCode,
    f: TamperingFunction,
    m: str,
    budget: Optional[int] = None,
) -> FiniteDistribution:
    """Exact law of dec(f(enc(m, r))) over the uniform encoder seed."""
    code.check_correctness()
    if len(m) != code.k:
        raise InvalidInstanceError(f"message length {len(m)} != k={code.k}")
    if f is BOT_MAP:
        return FiniteDistribution.point(BOT)
    if isinstance(f, BITFunction):
        if f.n != code.n:
            raise InvalidInstanceError(f"function length {f.n} != n={code.n}")
        if f.has_erase:
            raise InvalidInstanceError(
                "Erase actions are resolved by the erasure-code layer; a "
                "plain code decodes binary words only"
            )
        evaluate = f.apply
    elif isinstance(f, AffineFunction):
        if f.in_dim != code.n or f.out_dim != code.n:
            raise InvalidInstanceError(
                f"affine shape {f.in_dim}->{f.out_dim} != n={code.n}"
            )
        evaluate = f.apply
    else:
        raise InvalidInstanceError(f"not a tampering function: {f!r}")
    _check_budget(code.seed_count, budget, "tampering experiment")
    share = Fraction(1, code.seed_count)
    masses: dict = {}
    for r in range(code.seed_count):
        outcome = code.dec(evaluate(code.enc(m, r)))
        masses[outcome] = masses.get(outcome, Fraction(0)) + share
    return FiniteDistribution(masses)


def tamper_distribution_channel(
    code: StochasticCode,
    seq: StateSequence,
    m: str,
    budget: Optional[int] = None,
) -> FiniteDistribution:
    """Exact law of dec(y), y drawn from the channel sequence on enc(m, r).

    Computed directly in product form; the elementary-pattern mixture
    path (tamper_distribution_channel_mixture) must agree exactly.
    """
    code.check_correctness()
    if seq.extended:
        raise InvalidInstanceError(
            "extended sequences tamper the composed scheme, not a plain code"
        )
    if seq.n != code.n:
        raise InvalidInstanceError(f"sequence length {seq.n} != n={code.n}")
    if len(m) != code.k:
        raise InvalidInstanceError(f"message length {len(m)} != k={code.k}")
    _check_budget(code.seed_count * (1 << code.n), budget, "channel experiment")
    share = Fraction(1, code.seed_count)
    masses: dict = {}
    for r in range(code.seed_count):
        out = seq.output_distribution(code.enc(m, r))
        for word, p in out.items():
            outcome = code.dec(word)
            masses[outcome] = masses.get(outcome, Fraction(0)) + share * p
    return FiniteDistribution(masses)


def tamper_distribution_channel_mixture(
    code: StochasticCode, seq: StateSequence, m: str
) -> FiniteDistribution:
    """Channel tamper law via the elementary-pattern mixture (cross-check)."""
    components = [
        (weight, tamper_distribution_fn(code, BITFunction(pattern), m))
        for pattern, weight in seq.mixture_weights()
    ]
    return mix(components)


def tamper_map(
    code: StochasticCode, f: TamperingFunction, budget: Optional[int] = None
) -> dict[str, FiniteDistribution]:
    """Tamper distribution for every message under one function."""
    return {
        m: tamper_distribution_fn(code, f, m, budget=budget)
        for m in code.messages()
    }


@dataclass(frozen=True)
class NMReport:
    """Certified simulator: epsilon is exactly max_m SD(T_m, Copy(D, m))."""

    epsilon: Fraction
    simulator: FiniteDistribution
    worst_message: str
    per_message_sd: dict[str, Fraction]

    def to_json(self) -> dict:
        return {
            "epsilon": format_rational(self.epsilon),
            "epsilon_float": float(self.epsilon),
            "simulator": self.simulator.to_json(),
            "worst_message": self.worst_message,
            "per_message_sd": {
                m: format_rational(v) for m, v in sorted(self.per_message_sd.items())
            },
        }


def _simulator_lp(
    messages: list[str], tamper_by_message: Mapping[str, FiniteDistribution]
) -> FiniteDistribution:
    """Optimal simulator via an exact LP.

    Variables: D(z) for z in messages + {BOT, SAME_STAR}, one slack per
    (message, outcome) bounding the positive part of T_m - Copy(D, m),
    and epsilon.  Since both sides are full distributions the positive
    parts sum to the statistical distance, so per-message constraints
    sum-of-slacks <= epsilon pin epsilon to the worst-case distance.
    """
    z_outcomes = [*messages, BOT, SAME_STAR]
    y_outcomes = [*messages, BOT]
    nd = len(z_outcomes)
    ny = len(y_outcomes)
    n_vars = nd + len(messages) * ny + 1
    eps_col = n_vars - 1
    d_col = {z: i for i, z in enumerate(z_outcomes)}

    def t_col(mi: int, yi: int) -> int:
        return nd + mi * ny + yi

    a_ub: list[list[Fraction]] = []
    b_ub: list[Fraction] = []
    zero_row = [Fraction(0)] * n_vars
    for mi, m in enumerate(messages):
        t_m = tamper_by_message[m]
        for yi, y in enumerate(y_outcomes):
            row = zero_row.copy()
            row[d_col[y]] = Fraction(-1)
            if y == m:
                row[d_col[SAME_STAR]] = Fraction(-1)
            row[t_col(mi, yi)] = Fraction(-1)
            a_ub.append(row)
            b_ub.append(-t_m.probability(y))
        row = zero_row.copy()
        for yi in range(ny):
            row[t_col(mi, yi)] = Fraction(1)
        row[eps_col] = Fraction(-1)
        a_ub.append(row)
        b_ub.append(Fraction(0))
    a_eq = [[Fraction(1)] * nd + [Fraction(0)] * (n_vars - nd)]
    b_eq = [Fraction(1)]
    c = zero_row.copy()
    c[eps_col] = Fraction(1)
    x, _ = solve_min(c, a_ub, b_ub, a_eq, b_eq)
    return FiniteDistribution({z: x[i] for z, i in d_col.items() if x[i] != 0})


def optimal_simulator(
    tamper_by_message: Mapping[str, FiniteDistribution]
) -> NMReport:
    """Best simulator distribution and its exact worst-case distance.

    The non-malleability definitions are existential ("there exists a
    distribution"); this computes the witness constructively and
    re-verifies the reported epsilon by direct summation.
    """
    if not tamper_by_message:
        raise InvalidInstanceError("no tamper distributions supplied")
    some_message = next(iter(tamper_by_message))
    k = len(some_message)
    messages = all_bitstrings(k)
    if set(tamper_by_message) != set(messages):
        raise InvalidInstanceError(
            f"need one distribution per message in {{0,1}}^{k}"
        )
    for m, dist in tamper_by_message.items():
        for outcome in dist.support:
            if outcome is SAME_STAR:
                raise InvalidInstanceError(
                    "tamper distributions never contain same*"
                )
            if outcome is not BOT and (
                not isinstance(outcome, str) or len(outcome) != k
            ):
                raise InvalidInstanceError(
                    f"outcome {outcome!r} outside {{0,1}}^{k} + bot"
                )

    first = tamper_by_message[messages[0]]
    if all(tamper_by_message[m] == first for m in messages):
        simulator = first
    elif all(
        tamper_by_message[m] == FiniteDistribution.point(m) for m in messages
    ):
        simulator = FiniteDistribution.point(SAME_STAR)
    else:
        simulator = _simulator_lp(messages, tamper_by_message)

    per_message = {
        m: statistical_distance(tamper_by_message[m], apply_copy(simulator, m))
        for m in messages
    }
    epsilon = max(per_message.values())
    worst = min(m for m, sd in per_message.items() if sd == epsilon)
    return NMReport(epsilon, simulator, worst, per_message)


def function_key(f: TamperingFunction) -> str:
    """Stable serialization key for a tampering function."""
    if f is BOT_MAP:
        return "bot-map"
    if isinstance(f, BITFunction):
        return f.to_string()
    if isinstance(f, AffineFunction):
        return f"M={'|'.join(f.matrix.row_strings())};d={f.delta}"
    raise InvalidInstanceError(f"not a tampering function: {f!r}")


@dataclass
class FamilyCertificate:
    """Worst-case simulator error over a tampering family, with witnesses."""

    epsilon: Fraction
    worst: TamperingFunction
    worst_report: NMReport
    per_function: dict[TamperingFunction, Fraction]
    simulators: dict[TamperingFunction, FiniteDistribution]

    @property
    def size(self) -> int:
        return len(self.per_function)

    def to_json(self) -> dict:
        return {
            "epsilon": format_rational(self.epsilon),
            "epsilon_float": float(self.epsilon),
            "family_size": self.size,
            "worst_function": function_key(self.worst),
            "worst_report": self.worst_report.to_json(),
        }


def certify_family(
    code: StochasticCode,
    functions: Iterable[TamperingFunction],
    budget: Optional[int] = None,
    cache: Optional[dict] = None,
    stop_at_or_above: Optional[Fraction] = None,
) -> Optional[FamilyCertificate]:
    """Optimal simulator for every family member; None when aborted early.

    `cache` memoizes LP solutions by tamper profile across calls (the
    profile determines the optimum).  With `stop_at_or_above`, returns
    None as soon as the running maximum reaches that bound -- used by
    the search loop, which only cares about strictly better codes.
    """
    code.check_correctness()
    if cache is None:
        cache = {}
    messages = code.messages()
    functions = list(functions)
    if not functions:
        raise InvalidInstanceError("empty tampering family")

    profiles: list[tuple] = []
    for f in functions:
        t_map = tamper_map(code, f, budget=budget)
        profiles.append(tuple(t_map[m] for m in messages))

    workers = thread_count()
    if workers > 1 and stop_at_or_above is None:
        from concurrent.futures import ThreadPoolExecutor

        todo = [p for p in set(profiles) if p not in cache]
        todo.sort(key=lambda profile: [sorted(
            (outcome_to_json(o), str(v)) for o, v in dist.items()) for dist in profile])

        def solve(profile):
            return optimal_simulator(dict(zip(messages, profile)))

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for profile, report in zip(todo, pool.map(solve, todo)):
                cache[profile] = report

    epsilon: Optional[Fraction] = None
    worst_idx = 0
    per_function: dict = {}
    simulators: dict = {}
    for idx, (f, profile) in enumerate(zip(functions, profiles)):
        report = cache.get(profile)
        if report is None:
            report = optimal_simulator(dict(zip(messages, profile)))
            cache[profile] = report
        per_function[f] = report.epsilon
        simulators[f] = report.simulator
        if epsilon is None or report.epsilon > epsilon:
            epsilon = report.epsilon
            worst_idx = idx
        if stop_at_or_above is not None and epsilon >= stop_at_or_above:
            return None
    worst = functions[worst_idx]
    worst_profile = profiles[worst_idx]
    return FamilyCertificate(
        epsilon=epsilon,
        worst=worst,
        worst_report=cache[worst_profile],
        per_function=per_function,
        simulators=simulators,
    )


def certify_bit_family(
    code: StochasticCode, budget: Optional[int] = None, cache: Optional[dict] = None
) -> FamilyCertificate:
    """Certificate over the full 4^n bitwise independent family."""
    _check_budget((4 ** code.n) * code.seed_count, budget, "bit-family certification")
    cert = certify_family(
        code, enumerate_bit_functions(code.n, 4), budget=budget, cache=cache
    )
    assert cert is not None
    return cert


def ds_mixture(
    seq: StateSequence,
    simulators: Mapping[BITFunction, FiniteDistribution],
) -> FiniteDistribution:
    """Sequence simulator: per-function simulators mixed by pattern weight.

    Only patterns with positive weight are consulted; a missing one is
    an error because the mixture would not be a distribution.
    """
    components = []
    for pattern, weight in seq.mixture_weights():
        f = BITFunction(pattern)
        if f not in simulators:
            raise InvalidInstanceError(
                f"no simulator for positive-weight pattern {f.to_string()}"
            )
        components.append((weight, simulators[f]))
    return mix(components)


@dataclass
class TransferReport:
    """Exact transfer check from the bit family to one state sequence.

    Invariant chain, checked exactly on every run:
    eps_channel <= ds_sd <= weighted_bound <= eps_bit.
    """

    eps_bit: Fraction
    eps_channel: Fraction
    ds_sd: Fraction
    weighted_bound: Fraction
    worst_message: str
    sequence_label: str

    def to_json(self) -> dict:
        return {
            "eps_bit": format_rational(self.eps_bit),
            "eps_bit_float": float(self.eps_bit),
            "eps_channel": format_rational(self.eps_channel),
            "eps_channel_float": float(self.eps_channel),
            "ds_sd": format_rational(self.ds_sd),
            "ds_sd_float": float(self.ds_sd),
            "weighted_bound": format_rational(self.weighted_bound),
            "worst_message": self.worst_message,
            "sequence": self.sequence_label,
        }


def verify_transfer(
    code: StochasticCode,
    seq: StateSequence,
    budget: Optional[int] = None,
    certificate: Optional[FamilyCertificate] = None,
) -> TransferReport:
    """Check the bit-family-to-AVC transfer on one binary state sequence.

    Builds the mixture simulator D_s from the per-function optimal
    simulators and verifies, exactly, that its worst-case distance to
    the channel tamper distributions is within the certified bit-family
    epsilon (and within the finer weighted bound).
    """
    if certificate is None:
        certificate = certify_bit_family(code, budget=budget)
    channel_map = {
        m: tamper_distribution_channel(code, seq, m, budget=budget)
        for m in code.messages()
    }
    eps_channel = optimal_simulator(channel_map).epsilon
    d_s = ds_mixture(seq, certificate.simulators)
    per_message = {
        m: statistical_distance(channel_map[m], apply_copy(d_s, m))
        for m in code.messages()
    }
    ds_sd = max(per_message.values())
    worst = min(m for m, sd in per_message.items() if sd == ds_sd)
    weighted_bound = Fraction(0)
    for pattern, weight in seq.mixture_weights():
        weighted_bound += weight * certificate.per_function[BITFunction(pattern)]
    if not (eps_channel <= ds_sd <= weighted_bound <= certificate.epsilon):
        raise VerificationError(
            f"transfer inequality violated: eps_channel={eps_channel}, "
            f"ds_sd={ds_sd}, weighted={weighted_bound}, "
            f"eps_bit={certificate.epsilon}"
        )
    label = ",".join(seq.labels) if seq.labels else f"n={seq.n}"
    return TransferReport(
        eps_bit=certificate.epsilon,
        eps_channel=eps_channel,
        ds_sd=ds_sd,
        weighted_bound=weighted_bound,
        worst_message=worst,
        sequence_label=label,
    )


@dataclass
class SearchResult:
    """Best code found by seeded random search, with its certificate."""

    code: StochasticCode
    certificate: FamilyCertificate
    trials: int
    seed: int
    best_trial: int
    family_size: int

    def to_json(self) -> dict:
        payload = self.code.to_json()
        payload["meta"] = {
            "epsilon": format_rational(self.certificate.epsilon),
            "epsilon_float": float(self.certificate.epsilon),
            "worst_function": function_key(self.certificate.worst),
            "trials": self.trials,
            "seed": self.seed,
            "best_trial": self.best_trial,
            "family_size": self.family_size,
        }
        return payload


def _random_injective_code(
    k: int, n: int, rho: int, rng: random.Random
) -> StochasticCode:
    words = rng.sample(range(1 << n), (1 << k) * (1 << rho))
    enc_table: dict[str, list[str]] = {}
    dec_table: dict[str, str] = {}
    idx = 0
    for m in all_bitstrings(k):
        row = []
        for _ in range(1 << rho):
            word = int_to_bits(words[idx], n)
            row.append(word)
            dec_table[word] = m
            idx += 1
        enc_table[m] = row
    return StochasticCode.from_tables(k, n, rho, enc_table, dec_table)


def search_nm_code(
    k: int,
    n: int,
    rho: int,
    family: Union[str, Iterable[TamperingFunction]] = "bit",
    trials: int = 100,
    seed: int = 0,
    budget: Optional[int] = None,
) -> SearchResult:
    """Seeded random search for a low-error injective code.

    Samples injective encoders (decoder = inverse on the image, BOT
    elsewhere), certifies each against the family, and keeps the first
    code attaining the lowest worst-case epsilon.  Bit-for-bit
    reproducible from the seed.
    """
    if k + rho > n:
        raise InvalidInstanceError(
            f"injective encoding needs k + rho <= n, got {k}+{rho} > {n}"
        )
    if trials < 1:
        raise InvalidInstanceError("trials must be >= 1")
    if family == "bit":
        functions: list[TamperingFunction] = list(
            enumerate_bit_functions(n, 4, budget=budget)
        )
    else:
        functions = list(family)
    rng = random.Random(seed)
    cache: dict = {}
    best: Optional[SearchResult] = None
    for trial in range(trials):
        code = _random_injective_code(k, n, rho, rng)
        stop = best.certificate.epsilon if best is not None else None
        cert = certify_family(
            code, functions, budget=budget, cache=cache, stop_at_or_above=stop
        )
        if cert is None:
            continue
        best = SearchResult(
            code=code,
            certificate=cert,
            trials=trials,
            seed=seed,
            best_trial=trial,
            family_size=len(functions),
        )
        if cert.epsilon == 0:
            break
    assert best is not None  # trial 0 always completes (stop is None)
    return best
