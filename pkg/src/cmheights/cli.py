"""Batch front-end: field enumeration, per-field pipelines, corpus verification.

Exit status contract: 0 = all checks pass, 1 = an inequality check failed,
2 = an internal consistency assertion fired, 3 = configuration error.
Reports are written as JSON lines plus a CSV summary; all numbers are decimal
strings at full working precision, so identical configs produce byte-identical
reports.
"""

from __future__ import annotations

import argparse
import csv
import functools
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import mpmath as mp

from .arith import PrecisionContext
from .characters import is_odd, subgroup_closure
from .cmfields import (
    AbelianField,
    _field_from_subgroup,
    cm_types,
    discriminant_log,
    make_field,
    reflex_field,
)
from .colmez import (
    averaged_lhs,
    averaged_rhs,
    chowla_selberg_oracle,
    colmez_profile,
    faltings_height,
)
from .bounds import (
    bost_report,
    check_cyclotomic_disc_bound,
    check_disc_compositum,
    check_log_deriv_window,
    check_height_bound,
    check_mu_roots_of_unity,
    check_nearby_reflex,
)
from .errors import ConsistencyError, DomainError
from .lfun import stark_zero_scan
from .report import decimal_str

DEFAULT_DEGREE_MAX = 16
PRECISION_ENV_VAR = "CMHEIGHTS_BITS"


@dataclass
class RunConfig:
    command: str
    modulus_max: int = 12
    degree_max: int = DEFAULT_DEGREE_MAX
    precision_bits: int = 128
    scan_step_fraction: float = 1e-4
    c_param: Fraction = Fraction(1, 4)
    output_format: str = "json"
    output_path: Path | None = None
    modulus: int | None = None
    subgroup: tuple[int, ...] = ()
    cm_type_index: int = 0
    quadratic_d: int | None = None

    def validate(self) -> None:
        if self.modulus_max < 3:
            raise DomainError("modulus_max must be at least 3")
        if self.precision_bits < 64:
            raise DomainError("precision_bits must be at least 64")
        if not (0 < self.c_param <= Fraction(1, 4)):
            raise DomainError("c_param must lie in (0, 1/4]")
        if not (0 < self.scan_step_fraction < 1):
            raise DomainError("scan_step_fraction must lie in (0, 1)")
        if self.output_format not in ("json", "csv"):
            raise DomainError("output_format must be json or csv")

    @property
    def ctx(self) -> PrecisionContext:
        return PrecisionContext(self.precision_bits)


def _all_subgroups(n: int) -> set[frozenset[int]]:
    """Every subgroup of (Z/nZ)^x, by closure-BFS over added generators."""
    from .characters import _unit_group_any

    elements = _unit_group_any(n).elements
    trivial = subgroup_closure(n, ())
    found = {trivial}
    frontier = [trivial]
    while frontier:
        base = frontier.pop()
        for a in elements:
            if a in base:
                continue
            grown = subgroup_closure(n, tuple(base) + (a,))
            if grown not in found:
                found.add(grown)
                frontier.append(grown)
    return found


@functools.lru_cache(maxsize=None)
def _enumerate_fields_cached(modulus_max: int, degree_max: int) -> tuple[AbelianField, ...]:
    out = []
    seen = set()
    for n in range(3, modulus_max + 1):
        for sub in _all_subgroups(n):
            if (n - 1) in sub:
                continue  # totally real
            from .characters import euler_phi

            degree = euler_phi(n) // len(sub)
            if degree > degree_max:
                continue
            field = _field_from_subgroup(n, sub)
            if field.conductor != n:
                continue  # counted at its own conductor
            if field not in seen:
                seen.add(field)
                out.append(field)
    out.sort(key=lambda f: (f.conductor, f.degree, f.canonical_subgroup))
    return tuple(out)


def enumerate_fields(modulus_max: int, degree_max: int = DEFAULT_DEGREE_MAX):
    """All abelian CM fields of conductor <= modulus_max and degree <= degree_max.

    Deduplicated by canonical form (each field appears at its own conductor)
    and deterministically ordered.
    """
    return list(_enumerate_fields_cached(modulus_max, degree_max))


@functools.lru_cache(maxsize=None)
def scan_field(field: AbelianField, c_param: Fraction, step_fraction: float, bits: int):
    """Zero scan of the field's own odd-character product on its Stark interval.

    Cached: reflex fields recur across CM types and corpus checks share the
    per-field scans.
    """
    ctx = PrecisionContext(bits)
    odd = [chi for chi in field.character_group() if is_odd(chi)]
    return stark_zero_scan(
        odd,
        discriminant_log(field, ctx),
        c_param,
        step_fraction,
        ctx,
    )


def field_scan(field: AbelianField, config: RunConfig):
    return scan_field(
        field, config.c_param, config.scan_step_fraction, config.precision_bits
    )


@dataclass
class CorpusOutcome:
    records: list[dict]
    csv_rows: list[dict]
    failures: int
    hypothesis_failures: int


def run_corpus(config: RunConfig) -> CorpusOutcome:
    """Heights, averaged checks, scans and every bounds check over the corpus."""
    ctx = config.ctx
    fields = enumerate_fields(config.modulus_max, config.degree_max)
    records: list[dict] = []
    csv_rows: list[dict] = []
    failures = 0
    hypothesis_failures = 0
    scans: dict[AbelianField, object] = {}

    def scan_for(field: AbelianField):
        if field not in scans:
            scans[field] = field_scan(field, config)
        return scans[field]

    def tally(report) -> dict:
        nonlocal failures, hypothesis_failures
        if report.holds is False:
            failures += 1
        elif report.holds == "hypothesis-failed":
            hypothesis_failures += 1
        return report.to_json_dict(ctx)

    for field in fields:
        types = cm_types(field)
        heights = [faltings_height(field, t, ctx) for t in types]
        with ctx.workprec():
            lhs = mp.fsum(heights) / len(heights)
            rhs = averaged_rhs(field, ctx)
            residual = abs(lhs - rhs)
        scan = scan_for(field)
        check_dicts = []
        margins = []
        for t in types:
            reflex_scan = scan_for(reflex_field(field, t))
            for chi in field_odd_reflex_characters(field, t):
                lower, upper = check_log_deriv_window(field, t, chi, reflex_scan, ctx)
                check_dicts.append(tally(lower))
                check_dicts.append(tally(upper))
                margins.append(min(lower.margin, upper.margin))
            height_rep = check_height_bound(field, t, config.c_param, reflex_scan, ctx)
            check_dicts.append(tally(height_rep))
            margins.append(height_rep.margin)
            check_dicts.append(tally(bost_report(field, t, ctx)))
        for t1, t2 in nearby_type_pairs(field):
            rep = check_nearby_reflex(field, t1, t2, ctx)
            check_dicts.append(tally(rep))
            margins.append(rep.margin)
        rep_mu = check_mu_roots_of_unity(field, ctx)
        rep_cyc = check_cyclotomic_disc_bound(field, ctx)
        check_dicts.extend([tally(rep_mu), tally(rep_cyc)])
        margins.extend([rep_mu.margin, rep_cyc.margin])

        record = {
            "type": "field",
            "field": field.descriptor(),
            "g": field.g,
            "log_disc": decimal_str(discriminant_log(field, ctx), ctx),
            "heights": [decimal_str(h, ctx) for h in heights],
            "averaged_residual": decimal_str(residual, ctx),
            "scan": scan.to_json_dict(ctx),
            "checks": check_dicts,
        }
        records.append(record)
        csv_rows.append(
            {
                "field": field.label(),
                "g": field.g,
                "log_disc": record["log_disc"],
                "heights": ";".join(record["heights"]),
                "averaged_residual": record["averaged_residual"],
                "scan_delta": scan.delta_flag,
                "min_check_margin": decimal_str(min(margins), ctx) if margins else "",
            }
        )
        with ctx.workprec():
            if residual > mp.mpf(2) ** (-100):
                failures += 1

    # compositum inequality checks over all unordered pairs
    for i, f1 in enumerate(fields):
        for f2 in fields[i:]:
            for rep in check_disc_compositum(f1, f2, ctx):
                rec = tally(rep)
                rec["type"] = "pair-check"
                records.append(rec)

    return CorpusOutcome(records, csv_rows, failures, hypothesis_failures)


def field_odd_reflex_characters(field: AbelianField, cm_type):
    from .colmez import reflex_characters

    return [
        chi
        for chi in reflex_characters(field, cm_type)
        if not chi.is_trivial and is_odd(chi)
    ]


def nearby_type_pairs(field: AbelianField):
    """Unordered CM-type pairs with |Phi1 ^ Phi2| = g - 1."""
    types = cm_types(field)
    g = field.g
    pairs = []
    for i, t1 in enumerate(types):
        for t2 in types[i + 1 :]:
            if t1.intersection_size(t2) == g - 1:
                pairs.append((t1, t2))
    return pairs


def _parse_subgroup(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise DomainError(f"cannot parse subgroup generators from {text!r}") from exc


def _write_reports(config: RunConfig, records: list[dict], csv_rows: list[dict]) -> None:
    if config.output_path is None:
        for record in records:
            print(json.dumps(record, sort_keys=True))
        return
    base = Path(config.output_path)
    base.parent.mkdir(parents=True, exist_ok=True)
    jsonl = base.with_suffix(".jsonl")
    with open(jsonl, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
    if csv_rows:
        csv_path = base.with_suffix(".csv")
        with open(csv_path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(csv_rows[0]))
            writer.writeheader()
            writer.writerows(csv_rows)


def run(config: RunConfig) -> int:
    """Dispatch a command; returns the process exit status."""
    try:
        config.validate()
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3

    ctx = config.ctx
    try:
        if config.command == "enumerate":
            fields = enumerate_fields(config.modulus_max, config.degree_max)
            records = [
                {"type": "field", "field": f.descriptor(), "degree": f.degree}
                for f in fields
            ]
            _write_reports(config, records, [])
            return 0

        if config.command == "height":
            field = make_field(config.modulus, config.subgroup)
            types = cm_types(field)
            if not 0 <= config.cm_type_index < len(types):
                raise DomainError(
                    f"cm type index {config.cm_type_index} out of range (2^g = {len(types)})"
                )
            profile = colmez_profile(field, types[config.cm_type_index], ctx)
            _write_reports(config, [profile.to_json_dict(ctx)], [])
            return 0

        if config.command == "average-check":
            field = make_field(config.modulus, config.subgroup)
            lhs = averaged_lhs(field, ctx)
            rhs = averaged_rhs(field, ctx)
            residual = abs(lhs - rhs)
            record = {
                "type": "average-check",
                "field": field.descriptor(),
                "lhs": decimal_str(lhs, ctx),
                "rhs": decimal_str(rhs, ctx),
                "residual": decimal_str(residual, ctx),
            }
            _write_reports(config, [record], [])
            return 0 if residual < mp.mpf(2) ** (-100) else 1

        if config.command == "zero-scan":
            field = make_field(config.modulus, config.subgroup)
            report = field_scan(field, config)
            record = report.to_json_dict(ctx)
            record["type"] = "zero-scan"
            record["field"] = field.descriptor()
            _write_reports(config, [record], [])
            return 0

        if config.command == "chowla-selberg":
            if config.quadratic_d is None:
                raise DomainError("chowla-selberg requires --d")
            value = chowla_selberg_oracle(config.quadratic_d, ctx)
            record = {
                "type": "chowla-selberg",
                "d": config.quadratic_d,
                "height": decimal_str(value, ctx),
            }
            _write_reports(config, [record], [])
            return 0

        if config.command == "bounds-check" or config.command == "corpus":
            outcome = run_corpus(config)
            _write_reports(config, outcome.records, outcome.csv_rows)
            if outcome.failures or outcome.hypothesis_failures:
                return 1
            return 0

        raise DomainError(f"unknown command {config.command!r}")
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except ConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmheights",
        description="Heights of CM abelian varieties over abelian CM fields, with inequality audits",
    )
    parser.add_argument(
        "--precision-bits",
        type=int,
        default=int(os.environ.get(PRECISION_ENV_VAR, "128")),
        help="working precision in bits (env %s)" % PRECISION_ENV_VAR,
    )
    parser.add_argument("--output", type=Path, default=None, help="report path stem")
    sub = parser.add_subparsers(dest="command", required=True)

    p_enum = sub.add_parser("enumerate", help="list the CM field corpus")
    p_enum.add_argument("--modulus-max", type=int, default=12)
    p_enum.add_argument("--degree-max", type=int, default=DEFAULT_DEGREE_MAX)

    p_height = sub.add_parser("height", help="height of one (field, CM type)")
    p_height.add_argument("--modulus", type=int, required=True)
    p_height.add_argument("--subgroup", type=str, default="")
    p_height.add_argument("--cm-type", type=int, default=0)

    p_avg = sub.add_parser("average-check", help="averaged identity residual")
    p_avg.add_argument("--modulus", type=int, required=True)
    p_avg.add_argument("--subgroup", type=str, default="")

    p_scan = sub.add_parser("zero-scan", help="Stark-interval zero scan for one field")
    p_scan.add_argument("--modulus", type=int, required=True)
    p_scan.add_argument("--subgroup", type=str, default="")
    p_scan.add_argument("--step-fraction", type=float, default=1e-4)
    p_scan.add_argument("--c", type=str, default="1/4")

    p_cs = sub.add_parser("chowla-selberg", help="quadratic closed-form height")
    p_cs.add_argument("--d", type=int, required=True)

    for name in ("bounds-check", "corpus"):
        p_c = sub.add_parser(name, help="run checks over the enumerated corpus")
        p_c.add_argument("--modulus-max", type=int, default=12)
        p_c.add_argument("--degree-max", type=int, default=DEFAULT_DEGREE_MAX)
        p_c.add_argument("--step-fraction", type=float, default=1e-4)
        p_c.add_argument("--c", type=str, default="1/4")

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(
        command=args.command,
        precision_bits=args.precision_bits,
        output_path=args.output,
    )
    if hasattr(args, "modulus_max"):
        config.modulus_max = args.modulus_max
    if hasattr(args, "degree_max"):
        config.degree_max = args.degree_max
    if hasattr(args, "modulus"):
        config.modulus = args.modulus
    if hasattr(args, "subgroup"):
        config.subgroup = _parse_subgroup(args.subgroup)
    if hasattr(args, "cm_type"):
        config.cm_type_index = args.cm_type
    if hasattr(args, "step_fraction"):
        config.scan_step_fraction = args.step_fraction
    if hasattr(args, "c"):
        config.c_param = Fraction(args.c)
    if hasattr(args, "d"):
        config.quadratic_d = args.d
    return config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except (DomainError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    return run(config)


if __name__ == "__main__":
    raise SystemExit(main())
