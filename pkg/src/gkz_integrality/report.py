"""Reports: the record every command produces, and its canonical serializations.

A report is a status plus an ordered body of JSON values. Rationals are stored
as ``"p/q"`` strings, so the JSON form is exact and byte-deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Union

from gkz_integrality.classical import ClassCheck, ClassicalTerm, ResidueCheck
from gkz_integrality.constants import REPORT_FORMATS, TOOL_VERSION
from gkz_integrality.exceptions import InvalidInputError, ProblemFileError
from gkz_integrality.geometry import WeightBound
from gkz_integrality.series import Certificate, SearchParams, SeriesTerm, SystemCheck, Witness
from gkz_integrality.utils import format_rational, format_vector

Body = Dict[str, Any]


@dataclass(frozen=True)
class Report:
    """Outcome of one command.

    Attributes:
        mode: The subcommand that produced the report.
        status: Machine-readable verdict.
        body: Mode-specific fields, in output order.
        version: Tool version.
    """

    mode: str
    status: str
    body: Body = field(default_factory=dict)
    version: str = TOOL_VERSION

    def __post_init__(self) -> None:
        """Normalize the body to plain JSON values (tuples become lists)."""
        clash = {"mode", "status", "version"} & set(self.body)
        if clash:
            raise InvalidInputError(f"Report body may not define {sorted(clash)}")
        try:
            body = json.loads(json.dumps(self.body, ensure_ascii=False))
        except TypeError as exc:
            raise InvalidInputError(f"Report body is not JSON-serializable: {exc}") from exc
        object.__setattr__(self, "body", body)

    def as_dict(self) -> Body:
        """The report as one ordered mapping: mode, status, body fields, version."""
        return {"mode": self.mode, "status": self.status, **self.body, "version": self.version}


# --- Converters ---

def rational(value: Optional[Union[int, Fraction]]) -> Optional[str]:
    """Format a rational, passing None through."""
    return None if value is None else format_rational(value)


def search_to_dict(params: SearchParams) -> Body:
    """Search bounds as echoed into reports. The thread count is left out."""
    return {
        "max_b_multiplier": params.max_b_multiplier,
        "box_radius": params.box_radius,
        "order": params.order,
        "guard": params.guard,
    }


def witness_to_dict(witness: Optional[Witness]) -> Optional[Body]:
    """Witness fields, or None."""
    if witness is None:
        return None
    return {
        "r": format_vector(witness.r),
        "b": witness.b,
        "l": list(witness.l),
        "weight": format_rational(witness.weight),
    }


def certificate_to_dict(cert: Certificate) -> Body:
    """All certificate fields in declaration order.

    Examples:
        >>> from gkz_integrality.lattice import Configuration
        >>> from gkz_integrality.series import analyze
        >>> d = certificate_to_dict(analyze(Configuration(((1,), (2,))), (0, 0), 3))
        >>> d["status"], d["w_p_v"], d["lower_bound"]
        ('integral_certified', '0', '0')
    """
    return {
        "status": cert.status,
        "v": format_vector(cert.v),
        "p": cert.p,
        "w_p_v": format_rational(cert.w_p_v),
        "lower_bound": format_rational(cert.lower_bound),
        "witness": witness_to_dict(cert.witness),
        "residue_class": {
            "modulus": cert.residue_class.modulus,
            "residue": cert.residue_class.residue,
        },
        "search_bounds": search_to_dict(cert.search_bounds),
        "b_values": list(cert.b_values),
        "period": cert.period,
        "e": cert.e,
        "per_mu_terms": format_vector(cert.per_mu_terms),
        "per_mu_equalities": list(cert.per_mu_equalities),
    }


def bound_to_dict(bound: WeightBound) -> Body:
    """Lower-bound fields, including the per-mu comparison with the digit sums."""
    return {
        "lower_bound": format_rational(bound.bound),
        "e": bound.e,
        "period": bound.period,
        "per_mu_terms": format_vector(bound.per_mu_terms),
        "phi_sums": format_vector(bound.phi_sums),
        "per_mu_equalities": [bound.phi_sums[mu] == bound.term(mu)
                              for mu in range(bound.period)],
        "minimizers": [format_vector(point) for point in bound.minimizers],
    }


def terms_to_list(terms: Sequence[SeriesTerm]) -> List[Body]:
    """Per-term table: l, coefficient, pi-exponent and valuation."""
    return [
        {
            "l": list(term.l),
            "coefficient": format_rational(term.coefficient),
            "pi_exponent": term.pi_exponent,
            "valuation": rational(term.valuation),
        }
        for term in terms
    ]


def classical_terms_to_list(terms: Sequence[ClassicalTerm]) -> List[Body]:
    """Per-term table of a classical expansion."""
    return [
        {"m": list(term.m), "coefficient": format_rational(term.coefficient),
         "valuation": term.valuation}
        for term in terms
    ]


def system_check_to_dict(check: Optional[SystemCheck]) -> Optional[Body]:
    """Operator check fields, or None."""
    if check is None:
        return None
    failure = None
    if check.failure is not None:
        failure = {"operator": check.failure[0], "m": list(check.failure[1])}
    return {
        "passed": check.passed,
        "box_checked": check.box_checked,
        "euler_checked": check.euler_checked,
        "failure": failure,
    }


def class_check_to_dict(check: ClassCheck) -> Body:
    """One residue class with its xi minima."""
    return {
        "h": check.h,
        "period": check.period,
        "holds": check.holds,
        "steps": [
            {
                "mu": step.mu,
                "thetas": format_vector(step.thetas),
                "sigmas": format_vector(step.sigmas),
                "minimum": step.minimum,
                "minimizer": format_vector(step.minimizer),
            }
            for step in check.steps
        ],
    }


def residue_check_to_dict(result: ResidueCheck) -> Body:
    """All residue classes and the recombination note."""
    return {
        "classes": [class_check_to_dict(check) for check in result.classes],
        "failing": [check.h for check in result.failing],
        "note": result.note,
    }


# --- Emission and parsing ---

def _text_value(value: Any) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value, ensure_ascii=False, separators=(", ", ": "))


def emit(report: Report, fmt: str = "json") -> bytes:
    """Serialize a report canonically.

    The JSON form is indented, keeps the field order and ends with a newline.
    The text form prints one ``key: value`` line per field; reports that
    carry both ``w_p_v`` and ``lower_bound`` also get the line
    ``w_p(v) = <q> ≥ bound = <q>``.

    Raises:
        InvalidInputError: For an unknown format.
    """
    if fmt not in REPORT_FORMATS:
        raise InvalidInputError(f"Unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")
    data = report.as_dict()
    if fmt == "json":
        return (json.dumps(data, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    lines = [f"{key}: {_text_value(value)}" for key, value in data.items()]
    if "w_p_v" in report.body and "lower_bound" in report.body:
        lines.insert(2, f"w_p(v) = {report.body['w_p_v']} ≥ bound = "
                        f"{report.body['lower_bound']}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse(data: Union[bytes, str]) -> Report:
    """Rebuild a report from its JSON form.

    Raises:
        ProblemFileError: If the data is not a JSON report.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"Invalid report JSON: {exc.msg}",
                               line=exc.lineno, column=exc.colno) from exc
    if not isinstance(obj, dict):
        raise ProblemFileError("A report must be a JSON object")
    for key in ("mode", "status", "version"):
        if not isinstance(obj.get(key), str):
            raise ProblemFileError("Missing report field", field=key)
    mode = obj.pop("mode")
    status = obj.pop("status")
    version = obj.pop("version")
    return Report(mode, status, obj, version)
