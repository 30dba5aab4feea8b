"""Command-line interface.

Each subcommand reads a JSON problem file, runs one pipeline and writes a
report. Example problem file for ``gkz-integrality analyze``::

    {"A": [[1], [2]], "v": ["-1", "0"], "p": 3, "search": {"box": 20}}

Exit codes: 0 certified (or criterion holds), 2 undecided (or criterion
fails), 1 input error, 3 resource guard exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from gkz_integrality.arith import require_prime
from gkz_integrality.classical import (
    ClassicalSpec,
    classical_expand,
    cor57_check,
    factorial_ratio_spec,
)
from gkz_integrality.constants import (
    CRITERION_FAILS,
    CRITERION_HOLDS,
    EXIT_CERTIFIED,
    EXIT_INPUT_ERROR,
    EXIT_RESOURCE_GUARD,
    EXIT_UNDECIDED,
    INTEGRAL_CERTIFIED,
    MODES,
    REPORT_FORMATS,
    TOOL_VERSION,
    UNBOUNDED_CERTIFIED,
    UNDECIDED,
    VERIFIED,
)
from gkz_integrality.eisenstein import (
    AlgebraicSeries,
    denominator_constant,
    reduce_constant,
    tail_normalize,
)
from gkz_integrality.exceptions import (
    IntegralityError,
    InvalidInputError,
    PrefixError,
    ProblemFileError,
    ResourceGuardError,
)
from gkz_integrality.geometry import check_thm63, lower_bound_thm46
from gkz_integrality.lattice import Configuration, minimal_negative_support_check
from gkz_integrality.report import (
    Body,
    Report,
    bound_to_dict,
    certificate_to_dict,
    classical_terms_to_list,
    emit,
    residue_check_to_dict,
    search_to_dict,
    system_check_to_dict,
    terms_to_list,
)
from gkz_integrality.series import (
    SearchParams,
    analyze,
    expand,
    residue_transfer,
    transfer_check,
    verify_hypergeometric_system,
)
from gkz_integrality.utils import Vector, format_rational, format_vector, to_fraction

logger = logging.getLogger(__name__)

# Problem-file keys of the "search" block and the SearchParams fields they set
_SEARCH_KEYS = {
    "max_b": "max_b_multiplier",
    "box": "box_radius",
    "order": "order",
    "guard": "guard",
    "threads": "threads",
}

_EXIT_CODES = {
    INTEGRAL_CERTIFIED: EXIT_CERTIFIED,
    UNBOUNDED_CERTIFIED: EXIT_CERTIFIED,
    CRITERION_HOLDS: EXIT_CERTIFIED,
    VERIFIED: EXIT_CERTIFIED,
    UNDECIDED: EXIT_UNDECIDED,
    CRITERION_FAILS: EXIT_UNDECIDED,
}


# --- Problem files ---

@dataclass(frozen=True)
class ProblemFile:
    """A parsed problem description.

    Attributes:
        mode: One of MODES.
        payload: The remaining fields of the file.
        search: Search bounds (file values over defaults).
    """

    mode: str
    payload: Dict[str, Any] = field(default_factory=dict)
    search: SearchParams = field(default_factory=SearchParams)

    def __post_init__(self) -> None:
        """Validate the mode."""
        if self.mode not in MODES:
            raise ProblemFileError(f"Unknown mode {self.mode!r}", field="mode")


def _search_params(block: Any, base: Optional[SearchParams] = None) -> SearchParams:
    params = base or SearchParams()
    if block is None:
        return params
    if not isinstance(block, dict):
        raise ProblemFileError("Expected an object", field="search")
    changes = {}
    for key, value in block.items():
        if key not in _SEARCH_KEYS:
            raise ProblemFileError("Unknown search bound", field=f"search.{key}")
        if isinstance(value, bool) or not isinstance(value, int):
            raise ProblemFileError("Expected an integer", field=f"search.{key}")
        changes[_SEARCH_KEYS[key]] = value
    try:
        return replace(params, **changes)
    except InvalidInputError as exc:
        raise ProblemFileError(str(exc), field="search") from exc


def load_problem(text: str, mode: Optional[str] = None) -> ProblemFile:
    """Parse a JSON problem file.

    Args:
        text: File contents.
        mode: The subcommand; must agree with a ``mode`` field in the file.

    Raises:
        ProblemFileError: On a syntax error (with line and column) or a bad field.

    Examples:
        >>> load_problem('{"A": [[1], [2]], "v": ["-1", "0"], "p": 3}', "analyze").mode
        'analyze'
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"Invalid JSON: {exc.msg}",
                               line=exc.lineno, column=exc.colno) from exc
    if not isinstance(obj, dict):
        raise ProblemFileError("A problem file must contain a JSON object")
    declared = obj.pop("mode", None)
    if mode is not None and declared is not None and declared != mode:
        raise ProblemFileError(f"File is for {declared!r}, not {mode!r}", field="mode")
    chosen = mode or declared
    if chosen is None:
        raise ProblemFileError("No mode given", field="mode")
    search = _search_params(obj.pop("search", None))
    return ProblemFile(chosen, obj, search)


def read_problem(path: Path, mode: Optional[str] = None) -> ProblemFile:
    """Read and parse a problem file from disk."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"Cannot read {path}: {exc.strerror}") from exc
    return load_problem(text, mode)


# --- Field accessors ---

def _require(payload: Dict[str, Any], key: str) -> Any:
    if key not in payload:
        raise ProblemFileError("Missing field", field=key)
    return payload[key]


def _int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProblemFileError("Expected an integer", field=name)
    return value


def _rationals(value: Any, name: str) -> Vector:
    if not isinstance(value, list):
        raise ProblemFileError("Expected a list of rationals", field=name)
    result = []
    for i, x in enumerate(value):
        try:
            result.append(to_fraction(x))
        except InvalidInputError as exc:
            raise ProblemFileError(str(exc), field=f"{name}.{i}") from exc
    return tuple(result)


def _matrix(value: Any, name: str) -> List[List[int]]:
    if not isinstance(value, list) or not value:
        raise ProblemFileError("Expected a nonempty list of integer rows", field=name)
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise ProblemFileError("Expected a list of integers", field=f"{name}.{i}")
        rows.append([_int(x, f"{name}.{i}.{j}") for j, x in enumerate(row)])
    if any(len(row) != len(rows[0]) for row in rows):
        raise ProblemFileError("Rows have different lengths", field=name)
    return rows


def _prime(payload: Dict[str, Any], key: str = "p") -> int:
    p = _int(_require(payload, key), key)
    try:
        return require_prime(p)
    except InvalidInputError as exc:
        raise ProblemFileError(str(exc), field=key) from exc


def _primes(payload: Dict[str, Any], key: str) -> List[int]:
    value = payload.get(key, [])
    if not isinstance(value, list):
        raise ProblemFileError("Expected a list of primes", field=key)
    primes = []
    for i, x in enumerate(value):
        p = _int(x, f"{key}.{i}")
        try:
            primes.append(require_prime(p))
        except InvalidInputError as exc:
            raise ProblemFileError(str(exc), field=f"{key}.{i}") from exc
    return primes


def _configuration(payload: Dict[str, Any]) -> Configuration:
    columns = _matrix(_require(payload, "A"), "A")
    try:
        return Configuration.from_vectors(columns)
    except InvalidInputError as exc:
        raise ProblemFileError(str(exc), field="A") from exc


def _exponents(payload: Dict[str, Any], cfg: Configuration) -> Vector:
    v = _rationals(_require(payload, "v"), "v")
    if len(v) != cfg.N:
        raise ProblemFileError(f"Expected {cfg.N} entries", field="v")
    return v


def _classical_spec(payload: Dict[str, Any]) -> ClassicalSpec:
    try:
        if "numerators" in payload:
            return factorial_ratio_spec(_matrix(payload["numerators"], "numerators"),
                                        _matrix(_require(payload, "denominators"),
                                                "denominators"))
        denominator = payload.get("denominator")
        return ClassicalSpec(
            tuple(tuple(row) for row in _matrix(_require(payload, "c"), "c")),
            tuple(tuple(row) for row in _matrix(_require(payload, "d"), "d")),
            _rationals(_require(payload, "thetas"), "thetas"),
            _rationals(_require(payload, "sigmas"), "sigmas"),
            None if denominator is None else _int(denominator, "denominator"),
        )
    except ProblemFileError:
        raise
    except InvalidInputError as exc:
        raise ProblemFileError(str(exc), field="spec") from exc


def _algebraic_series(payload: Dict[str, Any]) -> AlgebraicSeries:
    annihilator = _require(payload, "F")
    if not isinstance(annihilator, str):
        raise ProblemFileError("Expected a polynomial in X and Z", field="F")
    if "prefix" in payload:
        return AlgebraicSeries(annihilator, _rationals(payload["prefix"], "prefix"))
    c0 = _rationals([_require(payload, "c0")], "c0")[0]
    length = _int(_require(payload, "length"), "length")
    return AlgebraicSeries.from_simple_root(annihilator, c0, length)


# --- Pipelines ---

def _run_analyze(problem: ProblemFile) -> Report:
    cfg = _configuration(problem.payload)
    v = _exponents(problem.payload, cfg)
    p = _prime(problem.payload)
    cert = analyze(cfg, v, p, problem.search)
    body = certificate_to_dict(cert)
    del body["status"]
    body["residue"] = None
    if cert.status != UNDECIDED:
        body["residue"] = residue_transfer(cert).statement
    minimality = minimal_negative_support_check(cfg, v, problem.search.box_radius,
                                                problem.search.guard)
    body["minimality"] = {
        "verdict": minimality.verdict,
        "witness": None if minimality.witness is None else list(minimality.witness),
    }
    primes = _primes(problem.payload, "transfer_primes")
    if primes and cert.status == UNDECIDED:
        logger.warning("Undecided certificate; transfer checks skipped")
        primes = []
    body["transfer_checks"] = [{"prime": prime, "holds": transfer_check(cfg, cert, prime)}
                               for prime in primes]
    return Report("analyze", cert.status, body)


def _run_series(problem: ProblemFile) -> Report:
    cfg = _configuration(problem.payload)
    v = _exponents(problem.payload, cfg)
    p = _prime(problem.payload)
    order = problem.search.order
    terms = expand(cfg, v, p, order, problem.search.guard)
    try:
        check = verify_hypergeometric_system(cfg, v, order, problem.search.guard)
    except InvalidInputError as exc:
        logger.warning("Operator check skipped: %s", exc)
        check = None
    status = VERIFIED if check is None or check.passed else CRITERION_FAILS
    body: Body = {
        "v": format_vector(v),
        "p": p,
        "order": order,
        "terms": terms_to_list(terms),
        "system_check": system_check_to_dict(check),
    }
    return Report("series", status, body)


def _run_bound(problem: ProblemFile) -> Report:
    cfg = _configuration(problem.payload)
    v = _exponents(problem.payload, cfg)
    p = _prime(problem.payload)
    bound = lower_bound_thm46(cfg, v, p, problem.search.guard, problem.search.threads)
    body: Body = {"v": format_vector(v), "p": p}
    body.update(bound_to_dict(bound))
    status = CRITERION_HOLDS if all(body["per_mu_equalities"]) else CRITERION_FAILS
    return Report("bound", status, body)


def _run_thm63(problem: ProblemFile) -> Report:
    cfg = _configuration(problem.payload)
    v = _exponents(problem.payload, cfg)
    result = check_thm63(cfg, v, problem.search.guard)
    body: Body = {
        "v": format_vector(v),
        "minimum": format_rational(result.minimum),
        "target": format_rational(result.target),
        "minimizer": format_vector(result.minimizer),
    }
    return Report("thm63", CRITERION_HOLDS if result.holds else CRITERION_FAILS, body)


def _run_classical(problem: ProblemFile) -> Report:
    spec = _classical_spec(problem.payload)
    result = cor57_check(spec, problem.search.guard, problem.search.threads)
    body: Body = {
        "D": spec.D,
        "statement": (f"integral for all p ∤ {spec.D}" if result.holds
                      else f"not integral for some p ∤ {spec.D}"),
    }
    body.update(residue_check_to_dict(result))
    body["expansions"] = [
        {"p": p, "terms": classical_terms_to_list(classical_expand(spec, p,
                                                                   problem.search.order))}
        for p in _primes(problem.payload, "primes")
    ]
    return Report("classical", CRITERION_HOLDS if result.holds else CRITERION_FAILS, body)


def _run_eisenstein(problem: ProblemFile) -> Report:
    series = _algebraic_series(problem.payload)
    tn = tail_normalize(series)
    constant = denominator_constant(tn, series)
    body: Body = {
        "F": str(series.F.as_expr()),
        "mu": tn.mu,
        "M": tn.M,
        "M_prime": tn.M_prime,
        "rho": tn.rho,
        "F0": str(tn.F0.as_expr()),
        "tau": constant.tau,
        "construction_constant": constant.N,
        "N": reduce_constant(constant.N, series.prefix),
        "verified_up_to": constant.verified_up_to,
    }
    return Report("eisenstein", VERIFIED, body)


_PIPELINES: Dict[str, Callable[[ProblemFile], Report]] = {
    "analyze": _run_analyze,
    "classical": _run_classical,
    "series": _run_series,
    "bound": _run_bound,
    "thm63": _run_thm63,
    "eisenstein": _run_eisenstein,
}


def run(problem: ProblemFile) -> Report:
    """Run the pipeline of the problem's mode.

    Every report echoes the search bounds it ran under.

    Examples:
        >>> problem = load_problem('{"A": [[1], [2]], "v": ["-1", "0"], "p": 3}', "analyze")
        >>> report = run(problem)
        >>> report.status, report.body["witness"]["r"]
        ('unbounded_certified', ['0', '-1/2'])
    """
    start = time.perf_counter()
    report = _PIPELINES[problem.mode](problem)
    if "search_bounds" not in report.body:
        report = Report(report.mode, report.status,
                        {**report.body, "search_bounds": search_to_dict(problem.search)})
    logger.info("%s finished with %s in %.3fs", problem.mode, report.status,
                time.perf_counter() - start)
    return report


def exit_code(report: Report) -> int:
    """Exit code for a report status."""
    return _EXIT_CODES.get(report.status, EXIT_UNDECIDED)


# --- Argument parsing ---

def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser with one subcommand per mode."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", required=True, type=Path,
                        help="JSON problem file")
    common.add_argument("--output", "-o", type=Path, help="write the report here (default stdout)")
    common.add_argument("--format", choices=REPORT_FORMATS, default="json",
                        help="report format (default json)")
    common.add_argument("--max-b", type=int, help="b ranges over a, 2a, ..., MAX_B * a")
    common.add_argument("--box", type=int, help="kernel-basis coefficient radius")
    common.add_argument("--order", type=int, help="truncation order of expansions")
    common.add_argument("--guard", type=int, help="largest enumeration allowed")
    common.add_argument("--threads", type=int, help="worker threads")
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="log progress on stderr (repeat for debug output)")

    parser = argparse.ArgumentParser(
        prog="gkz-integrality",
        description="Decide p-integrality of A-hypergeometric series.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    commands = parser.add_subparsers(dest="mode", required=True)
    helps = {
        "analyze": "certify integral or unbounded coefficients at a prime",
        "classical": "integrality of a classical series over all residue classes",
        "series": "expand a series with the valuation of every term",
        "bound": "lattice-coset lower bound for the p-adic weight",
        "thm63": "integer-coefficient test for exponents in {-1, 0}",
        "eisenstein": "denominator constant of an algebraic power series",
    }
    for mode in MODES:
        commands.add_parser(mode, parents=[common], help=helps[mode])
    return parser


def _apply_flags(problem: ProblemFile, args: argparse.Namespace) -> ProblemFile:
    flags = {"max_b": args.max_b, "box": args.box, "order": args.order,
             "guard": args.guard, "threads": args.threads}
    block = {key: value for key, value in flags.items() if value is not None}
    return replace(problem, search=_search_params(block, problem.search))


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the ``gkz-integrality`` script."""
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        problem = _apply_flags(read_problem(args.input, args.mode), args)
        report = run(problem)
        data = emit(report, args.format)
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE_GUARD
    except (InvalidInputError, PrefixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except IntegralityError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.output is None:
        sys.stdout.write(data.decode("utf-8"))
    else:
        args.output.write_bytes(data)
    return exit_code(report)
