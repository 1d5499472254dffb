"""Command-line front end: exact reports as JSON/CSV plus text summaries.

Exit codes form a stable contract: 0 pass, 1 verification failed,
2 invalid input, 3 enumeration budget exceeded.  Reports carry exact
rational strings next to float renderings; the exact form is
authoritative.  Identical inputs and seeds give byte-identical JSON
apart from the generated_at timestamp.
"""

from __future__ import annotations

import csv
import io
import json
import random
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Optional

import click

from . import __version__
from .channels import (
    BinaryChannel,
    ExtendedChannel,
    StateSequence,
    channel_from_json,
    decompose,
    decompose_extended,
    feasible_interval,
)
from .composed import (
    ComposedScheme,
    SpecialStateSpec,
    certify_induced_family,
    verify_composed,
)
from .distributions import format_rational, parse_rational
from .errors import BudgetExceededError, NmavcError, VerificationError
from .gf2 import GF2Matrix, delta_exact, delta_monte_carlo
from .verifier import (
    StochasticCode,
    certify_bit_family,
    search_nm_code,
    verify_transfer,
)

EXIT_PASS = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_BUDGET = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        _fail(EXIT_INVALID_INPUT, f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        _fail(EXIT_INVALID_INPUT, f"{path} is not valid JSON: {exc}")


def _provenance(**fields) -> dict:
    base = {
        "tool": "nmavc",
        "version": __version__,
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }
    base.update({k: v for k, v in fields.items() if v is not None})
    return base


def _flatten(obj, prefix: str = "") -> list[tuple[str, object]]:
    rows: list[tuple[str, object]] = []
    if isinstance(obj, dict):
        for key in sorted(obj):
            rows.extend(_flatten(obj[key], f"{prefix}{key}."))
    elif isinstance(obj, list):
        for i, item in enumerate(obj):
            rows.extend(_flatten(item, f"{prefix}{i}."))
    else:
        rows.append((prefix.rstrip("."), obj))
    return rows


def _render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in _flatten(report):
            writer.writerow([key, value])
        return buffer.getvalue()
    lines = [f"{key} = {value}" for key, value in _flatten(report)]
    return "\n".join(lines) + "\n"


def _emit(report: dict, out: Optional[str], fmt: str, summary: str) -> None:
    rendered = _render(report, fmt)
    if out:
        Path(out).write_text(rendered, encoding="utf-8")
        click.echo(summary)
        click.echo(f"report written to {out}")
    else:
        click.echo(summary)
        click.echo(rendered, nl=False)


def _guard(fn):
    """Run fn, mapping package errors onto the exit-code contract."""
    try:
        return fn()
    except BudgetExceededError as exc:
        _fail(EXIT_BUDGET, str(exc))
    except VerificationError as exc:
        _fail(EXIT_VERIFICATION_FAILED, f"exact invariant violated: {exc}")
    except NmavcError as exc:
        _fail(EXIT_INVALID_INPUT, str(exc))


format_option = click.option(
    "--format", "fmt", type=click.Choice(["json", "csv", "text"]),
    default="json", show_default=True, help="Report rendering."
)
out_option = click.option(
    "--out", type=click.Path(dir_okay=False), default=None,
    help="Write the report to a file instead of stdout."
)


@click.group()
@click.version_option(version=__version__, prog_name="nmavc")
def main():
    """Exact verification lab for non-malleable coding over binary AVCs."""


@main.command("decompose")
@click.argument("channel_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha3", default=None, help="Set0 coefficient (rational string).")
@out_option
@format_option
def cmd_decompose(channel_file: str, alpha3: Optional[str], out, fmt):
    """Decompose a channel into elementary channels and check reconstruction."""

    def run():
        obj = _load_json(channel_file)
        channel = channel_from_json(obj)
        if isinstance(channel, BinaryChannel):
            chosen = parse_rational(alpha3) if alpha3 is not None else None
            dec = decompose(channel, chosen)
            lower, upper = feasible_interval(channel)
            interval = [format_rational(lower), format_rational(upper)]
            reconstructed = dec.reconstruct(extended=False)
        else:
            if alpha3 is not None:
                _fail(EXIT_INVALID_INPUT,
                      "--alpha3 applies to binary channels only")
            dec = decompose_extended(channel)
            interval = None
            reconstructed = dec.reconstruct(extended=True)
        exact = reconstructed == channel
        if not exact:
            raise VerificationError("reconstruction does not match the channel")
        names = ["keep", "flip", "set0", "set1", "erase"]
        report = {
            "alphas": {
                name: format_rational(a) for name, a in zip(names, dec.alphas)
            },
            "alphas_float": {
                name: float(a) for name, a in zip(names, dec.alphas)
            },
            "feasible_alpha3_interval": interval,
            "reconstruction_exact": exact,
            "provenance": _provenance(input=channel_file),
        }
        alphas_text = ", ".join(
            f"{name}={format_rational(a)}" for name, a in zip(names, dec.alphas) if a
        )
        _emit(report, out, fmt, f"decomposition: {alphas_text}")
        sys.exit(EXIT_PASS)

    _guard(run)


@main.command("delta")
@click.argument("generator_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("p_star")
@click.option("--budget", type=int, default=20, show_default=True,
              help="Max block length for exact 2^n enumeration.")
@click.option("--monte-carlo", "trials", type=int, default=None,
              help="Also estimate by Monte Carlo with this many trials.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for the Monte-Carlo estimate.")
@out_option
@format_option
def cmd_delta(generator_file, p_star, budget, trials, seed, out, fmt):
    """Exact erasure-decoding failure probability of a generator matrix."""

    def run():
        g = GF2Matrix.from_json(_load_json(generator_file))
        p = parse_rational(p_star)
        value = delta_exact(g, p, budget=budget)
        report = {
            "m": g.nrows,
            "n": g.ncols,
            "p_star": format_rational(p),
            "delta": format_rational(value),
            "delta_float": float(value),
            "recovery_probability": format_rational(1 - value),
            "provenance": _provenance(input=generator_file, budget=budget),
        }
        if trials is not None:
            estimate, ci95 = delta_monte_carlo(g, p, trials, seed)
            report["monte_carlo"] = {
                "trials": trials,
                "seed": seed,
                "estimate": estimate,
                "ci95": ci95,
            }
        _emit(report, out, fmt, f"delta = {format_rational(value)}")
        sys.exit(EXIT_PASS)

    _guard(run)


def _load_code(path: str) -> StochasticCode:
    return StochasticCode.from_json(_load_json(path))


def _binary_channel_from_entry(entry, dictionary: dict):
    if isinstance(entry, str):
        if entry not in dictionary:
            _fail(EXIT_INVALID_INPUT, f"unknown channel name {entry!r}")
        return dictionary[entry]
    return channel_from_json(entry)


def _load_sequences(path: str) -> list[StateSequence]:
    obj = _load_json(path)
    if not isinstance(obj, dict) or "sequences" not in obj:
        _fail(EXIT_INVALID_INPUT,
              f'{path} must be {{"channels": {{...}}, "sequences": [...]}}')
    dictionary = {
        name: channel_from_json(ch)
        for name, ch in obj.get("channels", {}).items()
    }
    sequences = []
    for row in obj["sequences"]:
        channels = [_binary_channel_from_entry(entry, dictionary) for entry in row]
        labels = [
            entry if isinstance(entry, str) else f"inline{i}"
            for i, entry in enumerate(row)
        ]
        sequences.append(StateSequence(channels, labels))
    return sequences


@main.command("nm-verify")
@click.argument("code_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--family", type=click.Choice(["bit"]), default=None,
              help="Certify against the full bitwise independent family.")
@click.option("--sequences", "sequences_file",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="Verify against the state sequences in this file.")
@click.option("--budget", type=int, required=True,
              help="Cap on enumerated experiments (mandatory: enumeration "
                   "is exponential in n).")
@click.option("--threshold", default=None,
              help="Exit 1 unless the reported epsilon is <= this rational.")
@out_option
@format_option
def cmd_nm_verify(code_file, family, sequences_file, budget, threshold, out, fmt):
    """Certify a code's non-malleability error exactly."""
    if (family is None) == (sequences_file is None):
        _fail(EXIT_INVALID_INPUT, "choose exactly one of --family / --sequences")

    def run():
        code = _load_code(code_file)
        limit = parse_rational(threshold) if threshold is not None else None
        if family == "bit":
            cert = certify_bit_family(code, budget=budget)
            epsilon = cert.epsilon
            report = {
                "mode": "bit-family",
                "certificate": cert.to_json(),
                "provenance": _provenance(input=code_file, budget=budget),
            }
            summary = (
                f"eps over 4^{code.n} bit functions = {format_rational(epsilon)} "
                f"(worst: {report['certificate']['worst_function']})"
            )
        else:
            sequences = _load_sequences(sequences_file)
            if not sequences:
                _fail(EXIT_INVALID_INPUT, "no sequences to verify")
            cert = certify_bit_family(code, budget=budget)
            per_sequence = {}
            epsilon = Fraction(0)
            for seq in sequences:
                result = verify_transfer(code, seq, budget=budget, certificate=cert)
                per_sequence[result.sequence_label] = result.to_json()
                epsilon = max(epsilon, result.eps_channel)
            report = {
                "mode": "sequences",
                "eps_bit": format_rational(cert.epsilon),
                "eps_max_over_sequences": format_rational(epsilon),
                "sequences": per_sequence,
                "provenance": _provenance(
                    input=code_file, sequences=sequences_file, budget=budget
                ),
            }
            summary = (
                f"max per-sequence eps = {format_rational(epsilon)} over "
                f"{len(sequences)} sequences (bit-family bound "
                f"{format_rational(cert.epsilon)})"
            )
        report["threshold"] = (
            format_rational(limit) if limit is not None else None
        )
        passed = limit is None or epsilon <= limit
        report["passed"] = passed
        _emit(report, out, fmt, summary)
        sys.exit(EXIT_PASS if passed else EXIT_VERIFICATION_FAILED)

    _guard(run)


@main.command("search")
@click.option("--k", type=int, required=True, help="Message bits.")
@click.option("--n", type=int, required=True, help="Block bits.")
@click.option("--rho", type=int, required=True, help="Encoder seed bits.")
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--seed", type=int, required=True,
              help="Search seed (explicit for reproducibility).")
@click.option("--induced-by", "generator_file",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="Certify against the maps induced by this outer generator "
                   "instead of the raw bit family.")
@click.option("--budget", type=int, default=1_000_000, show_default=True)
@out_option
@format_option
def cmd_search(k, n, rho, trials, seed, generator_file, budget, out, fmt):
    """Search seeded random injective codes, keeping the lowest-epsilon one."""

    def run():
        if generator_file is not None:
            from .composed import induced_family

            outer = GF2Matrix.from_json(_load_json(generator_file))
            if outer.nrows != n:
                _fail(EXIT_INVALID_INPUT,
                      f"outer generator has m={outer.nrows}, but the inner "
                      f"code produces n={n} bits")
            family = induced_family(outer, budget=budget)
        else:
            family = "bit"
        result = search_nm_code(
            k, n, rho, family=family, trials=trials, seed=seed, budget=budget
        )
        report = result.to_json()
        report["provenance"] = _provenance(budget=budget)
        _emit(
            report, out, fmt,
            f"best eps = {format_rational(result.certificate.epsilon)} "
            f"(trial {result.best_trial} of {trials}, family size "
            f"{result.family_size})",
        )
        sys.exit(EXIT_PASS)

    _guard(run)


def _extended_channel(obj) -> ExtendedChannel:
    channel = channel_from_json(obj)
    if isinstance(channel, BinaryChannel):
        return channel.to_extended()
    return channel


def _composed_sequences(spec_obj, names, special_name, n) -> tuple[list, bool]:
    listing = spec_obj["sequences"]
    if listing == "exhaustive":
        from itertools import product as iproduct

        rows = [
            row for row in iproduct(names, repeat=n)
            if set(row) != {special_name}
        ]
        return rows, True
    if isinstance(listing, dict):
        count = listing.get("random")
        seed = listing.get("seed")
        if not isinstance(count, int) or not isinstance(seed, int):
            _fail(EXIT_INVALID_INPUT,
                  'random sequences need {"random": count, "seed": seed}')
        rng = random.Random(seed)
        rows = []
        while len(rows) < count:
            row = tuple(rng.choice(names) for _ in range(n))
            if set(row) == {special_name}:
                continue
            rows.append(row)
        return rows, False
    if isinstance(listing, list):
        rows = []
        for row in listing:
            if len(row) != n:
                _fail(EXIT_INVALID_INPUT,
                      f"sequence {row} has length {len(row)}, expected {n}")
            rows.append(tuple(row))
        return rows, False
    _fail(EXIT_INVALID_INPUT, "sequences must be a list, 'exhaustive', or random spec")


@main.command("composed-verify")
@click.option("--spec", "spec_file", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Experiment spec JSON (codes, states, sequences, budget).")
@click.option("--threshold", default=None,
              help="Exit 1 unless eps_max is <= this rational.")
@out_option
@format_option
def cmd_composed_verify(spec_file, threshold, out, fmt):
    """Verify a composed (inner code + erasure code) scheme end to end."""

    def run():
        spec_obj = _load_json(spec_file)
        for field in ("inner_code", "outer", "p_star", "states",
                      "special_state", "sequences", "budget"):
            if field not in spec_obj:
                _fail(EXIT_INVALID_INPUT, f"spec lacks required field {field!r}")
        inner_ref = spec_obj["inner_code"]
        if isinstance(inner_ref, str):
            inner_path = Path(spec_file).parent / inner_ref
            inner = StochasticCode.from_json(_load_json(str(inner_path)))
        else:
            inner = StochasticCode.from_json(inner_ref)
        outer = GF2Matrix.from_json(spec_obj["outer"])
        scheme = ComposedScheme(inner, outer)
        p_star = parse_rational(spec_obj["p_star"])
        spec = SpecialStateSpec(p_star=p_star, n=scheme.n)
        states = {
            name: _extended_channel(ch)
            for name, ch in spec_obj["states"].items()
        }
        special_name = spec_obj["special_state"]
        if special_name not in states:
            _fail(EXIT_INVALID_INPUT, f"unknown special state {special_name!r}")
        if states[special_name] != spec.channel():
            _fail(EXIT_INVALID_INPUT,
                  f"state {special_name!r} must equal BEC(p_star) exactly")
        names = sorted(states)
        budget = spec_obj["budget"]
        rows, exhaustive = _composed_sequences(spec_obj, names, special_name, scheme.n)
        sequences = [
            StateSequence([states[name] for name in row], labels=row)
            for row in rows
        ]
        report_obj = verify_composed(
            scheme, sequences, spec, budget=budget, exhaustive=exhaustive
        )
        limit = parse_rational(threshold) if threshold is not None else None
        report = report_obj.to_json()
        report["threshold"] = format_rational(limit) if limit is not None else None
        passed = limit is None or report_obj.eps_max <= limit
        report["passed"] = passed
        report["provenance"] = _provenance(input=spec_file, budget=budget)
        _emit(
            report, out, fmt,
            f"delta = {format_rational(report_obj.delta)}, eps_max = "
            f"{format_rational(report_obj.eps_max)} over "
            f"{report_obj.sequences_checked} sequences"
            + (" (exhaustive)" if exhaustive else ""),
        )
        sys.exit(EXIT_PASS if passed else EXIT_VERIFICATION_FAILED)

    _guard(run)


@main.command("certify-inner")
@click.argument("code_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("generator_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--budget", type=int, default=1_000_000, show_default=True)
@out_option
@format_option
def cmd_certify_inner(code_file, generator_file, budget, out, fmt):
    """Certify an inner code against the maps induced by an outer generator."""

    def run():
        inner = _load_code(code_file)
        outer = GF2Matrix.from_json(_load_json(generator_file))
        cert = certify_induced_family(inner, outer, budget=budget)
        report = {
            "certificate": cert.to_json(),
            "provenance": _provenance(
                input=code_file, generator=generator_file, budget=budget
            ),
        }
        _emit(report, out, fmt,
              f"eps over induced family = {format_rational(cert.epsilon)} "
              f"({cert.size} distinct maps)")
        sys.exit(EXIT_PASS)

    _guard(run)


if __name__ == "__main__":
    main()
