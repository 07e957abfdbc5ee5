"""Term-by-term assembly of the reciprocity moment from supplied spectral data.

A dataset describes one side of the reciprocity: rows are automorphic
representations (or quadrature samples of the continuous spectrum) of
level dividing the *level prime*, weighted by their Hecke eigenvalue at the
*Hecke prime*. With level prime ``l`` and Hecke prime ``h`` a row contributes

    C * lambda(h) * eta * L_central * f_inf * ell(pi, l) / adjoint_Lstar * weight

and the total is ``sqrt(h)/(h+1)`` times the sum of all terms.

All reals in the input are decimal strings and are parsed exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any

from .numerics import ExactScalar, decimal_string, to_approx
from .periods import TruncationPlan, local_ell_v

__all__ = [
    "SpectralDatum",
    "Dataset",
    "MomentReport",
    "SchemaViolation",
    "InvariantViolation",
    "MissingLocalType",
    "load_spectral_data",
    "parse_spectral_data",
    "assemble_moment",
    "reciprocity_report",
    "GOLDEN_SAMPLE",
]

GOLDEN_SAMPLE = Path(__file__).with_name("data") / "golden_sample.json"

_KINDS = ("cuspidal", "eisenstein-sample")
_LOCAL_TYPES = ("unramified", "steinberg")
_UNITS = ("finite", "completed")
_REAL_FIELDS = ("lambda_p", "lambda_q", "L_central", "adjoint_Lstar", "f_inf", "quadrature_weight")
_ROW_KEYS = {"id", "kind", "local_type", "eta", "L_units", *_REAL_FIELDS}
_OPTIONAL = {"L_units", "quadrature_weight"}


class SchemaViolation(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class InvariantViolation(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class MissingLocalType(ValueError):
    pass


@dataclass(frozen=True)
class SpectralDatum:
    id: str
    kind: str
    local_type: str
    lambda_p: Fraction
    lambda_q: Fraction
    eta: int
    L_central: Fraction
    adjoint_Lstar: Fraction
    f_inf: Fraction
    quadrature_weight: Fraction = Fraction(1)
    L_units: str = "finite"


@dataclass(frozen=True)
class Dataset:
    field_label: str
    rows: tuple[SpectralDatum, ...] = ()

    def __add__(self, other: "Dataset") -> "Dataset":
        return Dataset(self.field_label, self.rows + other.rows)


def _decimal(value, path: str) -> Fraction:
    if not isinstance(value, str):
        raise SchemaViolation(path, "reals must be decimal strings")
    try:
        out = Fraction(value.strip())
    except (ValueError, ZeroDivisionError):
        raise SchemaViolation(path, f"not a decimal number: {value!r}") from None
    return out


def _parse_row(raw: Any, path: str) -> SpectralDatum:
    if not isinstance(raw, dict):
        raise SchemaViolation(path, "row must be an object")
    unknown = set(raw) - _ROW_KEYS
    if unknown:
        raise SchemaViolation(f"{path}.{sorted(unknown)[0]}", "unknown key")
    for key in sorted(_ROW_KEYS - _OPTIONAL):
        if key not in raw:
            raise SchemaViolation(f"{path}.{key}", "missing")
    if not isinstance(raw["id"], str):
        raise SchemaViolation(f"{path}.id", "must be a string")
    kind = raw["kind"]
    if kind not in _KINDS:
        raise SchemaViolation(f"{path}.kind", f"must be one of {_KINDS}")
    local_type = raw["local_type"]
    if local_type not in _LOCAL_TYPES:
        raise SchemaViolation(f"{path}.local_type", f"must be one of {_LOCAL_TYPES}")
    units = raw.get("L_units", "finite")
    if units not in _UNITS:
        raise SchemaViolation(f"{path}.L_units", f"must be one of {_UNITS}")
    eta = raw["eta"]
    if isinstance(eta, str):
        eta = _decimal(eta, f"{path}.eta")
    elif isinstance(eta, bool) or not isinstance(eta, int):
        raise SchemaViolation(f"{path}.eta", "must be an integer or a decimal string")
    if eta not in (1, -1):
        raise InvariantViolation(f"{path}.eta", "must be +1 or -1")
    reals = {}
    for key in _REAL_FIELDS:
        if key in raw:
            reals[key] = _decimal(raw[key], f"{path}.{key}")
    if "quadrature_weight" not in reals:
        if kind == "eisenstein-sample":
            raise SchemaViolation(f"{path}.quadrature_weight", "required for continuous samples")
        reals["quadrature_weight"] = Fraction(1)
    if reals["adjoint_Lstar"] <= 0:
        raise InvariantViolation(f"{path}.adjoint_Lstar", "must be positive")
    if reals["f_inf"] < 0:
        raise InvariantViolation(f"{path}.f_inf", "must be non-negative")
    if reals["L_central"] < 0:
        raise InvariantViolation(f"{path}.L_central", "must be non-negative")
    return SpectralDatum(raw["id"], kind, local_type, eta=int(eta), L_units=units, **reals)


def parse_spectral_data(doc: Any) -> Dataset:
    """Validate an already-decoded document (a list of rows is also accepted)."""
    if isinstance(doc, list):
        doc = {"field_label": "", "rows": doc}
    if not isinstance(doc, dict):
        raise SchemaViolation("$", "top level must be an object")
    unknown = set(doc) - {"field_label", "rows"}
    if unknown:
        raise SchemaViolation(f"$.{sorted(unknown)[0]}", "unknown key")
    label = doc.get("field_label")
    if not isinstance(label, str):
        raise SchemaViolation("$.field_label", "must be a string")
    rows = doc.get("rows")
    if not isinstance(rows, list):
        raise SchemaViolation("$.rows", "must be a list")
    parsed = tuple(_parse_row(row, f"$.rows[{i}]") for i, row in enumerate(rows))
    ids = [row.id for row in parsed]
    if len(set(ids)) != len(ids):
        raise SchemaViolation("$.rows", "row ids must be unique")
    return Dataset(label, parsed)


def load_spectral_data(source) -> Dataset:
    """Load from a path, a JSON string, or a decoded document."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith(("{", "["))):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, str):
        text = source
    else:
        return parse_spectral_data(source)

    def reject_constant(name):
        raise SchemaViolation("$", f"non-finite number {name}")

    try:
        doc = json.loads(text, parse_constant=reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("$", f"invalid JSON: {exc.msg}") from None
    return parse_spectral_data(doc)


@dataclass
class MomentReport:
    level_prime: int
    hecke_prime: int
    case_constant: Fraction
    terms: list = field(default_factory=list)
    cusp: ExactScalar | None = None
    eis: ExactScalar | None = None
    prefactor: ExactScalar | None = None

    @property
    def subtotal(self) -> ExactScalar:
        return self.cusp + self.eis

    def total_approx(self, prec: int = 200):
        return to_approx(self.prefactor, prec) * to_approx(self.subtotal, prec)

    def to_dict(self) -> dict:
        return {
            "level_prime": self.level_prime,
            "hecke_prime": self.hecke_prime,
            "case_constant": decimal_string(self.case_constant),
            "terms": [
                {"id": t["id"], "kind": t["kind"], "local_type": t["local_type"],
                 "local_factor": decimal_string(t["local_factor"]),
                 "local_factor_exact": str(t["local_factor"]),
                 "term": decimal_string(t["term"]), "term_exact": str(t["term"])}
                for t in self.terms
            ],
            "cuspidal_subtotal": decimal_string(self.cusp),
            "continuous_subtotal": decimal_string(self.eis),
            "prefactor": decimal_string(self.prefactor),
            "prefactor_exact": str(self.prefactor),
            "subtotal_exact": str(self.subtotal),
            "total": decimal_string(self.total_approx()),
        }


@lru_cache(maxsize=None)
def _steinberg_factor(q: int, lam1: Fraction, lam2: Fraction, twist: int, radius: int):
    return local_ell_v("steinberg-at-q", q, lam1=lam1, lam2=lam2, twist=twist,
                       plan=TruncationPlan(radius=radius)).value


def _local_factor(row: SpectralDatum, level: int, lam_level: Fraction, lam1, lam2, radius: int):
    if row.local_type == "unramified":
        return local_ell_v("unramified-at-q", level, lam_level, lam1, lam2).value
    if row.local_type == "steinberg":
        # the Atkin-Lehner sign of St_chi is -chi(p)
        return _steinberg_factor(level, Fraction(lam1), Fraction(lam2), -row.eta, radius)
    raise MissingLocalType(f"row {row.id} declares no usable local type")


def assemble_moment(dataset: Dataset, p: int, q: int, case_constant, side: str = "q", *,
                    lam1=Fraction(0), lam2=Fraction(0), radius: int = 60) -> MomentReport:
    """One side of the moment.

    ``side="q"``: level prime q, Hecke prime p (rows use ``lambda_p`` and
    ``lambda_q``). ``side="p"`` exchanges the roles. ``lam1``/``lam2`` are the
    Hecke eigenvalues of the two fixed forms at the level prime.
    """
    if p == q:
        raise ValueError("p and q must be distinct")
    if side == "q":
        level, hecke = q, p
    elif side == "p":
        level, hecke = p, q
    else:
        raise ValueError("side must be 'p' or 'q'")
    C = Fraction(case_constant)
    lam1, lam2 = Fraction(lam1), Fraction(lam2)
    cusp = ExactScalar.rational(0, level)
    eis = ExactScalar.rational(0, level)
    terms = []
    for row in dataset.rows:
        lam_hecke = row.lambda_p if side == "q" else row.lambda_q
        lam_level = row.lambda_q if side == "q" else row.lambda_p
        ell = _local_factor(row, level, lam_level, lam1, lam2, radius)
        ell = ell if isinstance(ell, ExactScalar) else ExactScalar.rational(ell, level)
        scalar = C * lam_hecke * row.eta * row.L_central * row.f_inf / row.adjoint_Lstar * row.quadrature_weight
        term = ell * scalar
        terms.append({"id": row.id, "kind": row.kind, "local_type": row.local_type,
                      "local_factor": ell, "term": term})
        if row.kind == "cuspidal":
            cusp = cusp + term
        else:
            eis = eis + term
    prefactor = ExactScalar.sqrt_q(hecke) / (hecke + 1)
    return MomentReport(level, hecke, C, terms, cusp, eis, prefactor)


def reciprocity_report(dataset_qp: Dataset, dataset_pq: Dataset, p: int, q: int, case_constant, *,
                       lam1_q=0, lam2_q=0, lam1_p=0, lam2_p=0, radius: int = 60) -> dict:
    """Both sides and their difference; equality is reported, not asserted."""
    left = assemble_moment(dataset_qp, p, q, case_constant, "q", lam1=lam1_q, lam2=lam2_q, radius=radius)
    right = assemble_moment(dataset_pq, p, q, case_constant, "p", lam1=lam1_p, lam2=lam2_p, radius=radius)
    diff = left.total_approx() - right.total_approx()
    return {
        "side_qp": left.to_dict(),
        "side_pq": right.to_dict(),
        "difference": decimal_string(diff),
    }
