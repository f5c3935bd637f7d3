"""Serialization: series specification files, corpora, certificate JSON.

All exact rationals travel as "p/q" strings (never floats); numeric values
are decimal strings rendered deterministically at the owning basis
precision, so identical inputs always produce byte-identical files.
"""

from __future__ import annotations

import gzip
import json
from fractions import Fraction
from pathlib import Path
from .errors import SchemaError
from .grammar import parse_coefficient
from .series import (
    ONE,
    Exponent,
    FormalSeries,
    SymbolBasis,
    make_series,
)

TOOL_VERSION = "dforge 0.1.0"


def frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational {text!r}: {exc}") from None


def exponent_to_obj(e: Exponent) -> dict:
    out = {n: frac_str(q) for n, q in e.coords}
    if e.const != 0:
        out[ONE] = frac_str(e.const)
    return out


def obj_to_exponent(obj: dict) -> Exponent:
    if not isinstance(obj, dict):
        raise SchemaError("exponent must be an object of symbol -> rational")
    return Exponent.make({n: parse_frac(v) for n, v in obj.items()})


def basis_to_obj(basis: SymbolBasis) -> dict:
    return {
        "symbols": [{"name": n, "value_decimal_string": v}
                    for n, v in zip(basis.symbols, basis.values)],
        "precision_bits": basis.precision,
        "independence_assumed": basis.independence_assumed,
    }


def obj_to_basis(obj: dict) -> SymbolBasis:
    try:
        pairs = [(s["name"], s["value_decimal_string"]) for s in obj["symbols"]]
        return SymbolBasis.from_pairs(
            pairs,
            precision=int(obj.get("precision_bits", 128)),
            independence_assumed=bool(obj.get("independence_assumed", True)))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad basis block: {exc}") from None


def series_to_obj(s: FormalSeries) -> dict:
    terms = []
    for e, p in s.terms:
        for xdeg, c in p.coeffs:
            entry = {"exponent": exponent_to_obj(e), "coeff": str(c)}
            if xdeg:
                entry["xdegree"] = xdeg
            terms.append(entry)
    return {
        "basis": basis_to_obj(s.basis),
        "terms": terms,
        "truncation": None if s.truncation is None else exponent_to_obj(s.truncation),
    }


def obj_to_series(obj: dict) -> FormalSeries:
    try:
        basis = obj_to_basis(obj["basis"])
        spec = []
        for entry in obj["terms"]:
            e = obj_to_exponent(entry["exponent"])
            c = parse_coefficient(entry["coeff"], basis)
            spec.append((e, c, int(entry.get("xdegree", 0))))
        trunc = obj.get("truncation")
        bound = None if trunc is None else obj_to_exponent(trunc)
        return make_series(spec, basis, bound)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad series spec: {exc}") from None


def load_series(path) -> FormalSeries:
    with open(path, "r", encoding="utf-8") as fh:
        return obj_to_series(json.load(fh))


def dump_series(s: FormalSeries, path) -> None:
    Path(path).write_text(canonical_json(series_to_obj(s)) + "\n", encoding="utf-8")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# Coefficient corpora: newline-delimited "n a_n" (or bare "n"), gzip accepted
# ---------------------------------------------------------------------------

def read_corpus(path) -> list[tuple[int, Fraction]]:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    out: list[tuple[int, Fraction]] = []
    with opener(path, "rt", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                n = int(parts[0])
                a = parse_frac(parts[1]) if len(parts) > 1 else Fraction(1)
            except (ValueError, SchemaError) as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
            if n < 1:
                raise SchemaError(f"{path}:{lineno}: indices must be >= 1")
            out.append((n, a))
    return out
