"""Obstruction and satisfaction certificates.

A certificate packages the evidence of one analysis over a *scanned prefix*
of a series: lattice-rank growth, gap-ratio exceedances, coefficient-field
structure, bivariate degree/exponent statistics, a sign-flip construction,
or a substitution residual.  Verdicts never claim anything about unseen
terms; a standalone checker (:func:`recheck`) recomputes every claimed
value from the payload and must agree bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

import mpmath

from .errors import InsufficientNonzeroTerms, SchemaError, UnknownFamily
from .io import (
    TOOL_VERSION,
    basis_to_obj,
    canonical_json,
    exponent_to_obj,
    frac_str,
    obj_to_basis,
    obj_to_exponent,
    parse_frac,
)
from .lattice import RankScan, gap_ratios
from .numeric import workprec
from .series import Exponent, FormalSeries, SymbolBasis

FINITE_BASIS_REFUTATION = "FiniteBasisRefutation"
GAP_CRITERION = "GapCriterion"
COEFFICIENT_FIELD = "CoefficientField"
BIVARIATE_CRITERION = "BivariateCriterion"
SIGNFLIP_CONSTRUCTION = "SignFlipConstruction"
FORMAL_SATISFACTION = "FormalSatisfaction"
FORMAL_REFUTATION = "FormalRefutation"

KINDS = {
    FINITE_BASIS_REFUTATION, GAP_CRITERION, COEFFICIENT_FIELD,
    BIVARIATE_CRITERION, SIGNFLIP_CONSTRUCTION, FORMAL_SATISFACTION,
    FORMAL_REFUTATION,
}

VERDICT_SCOPE = "all claims are about the scanned prefix only"


@dataclass(frozen=True)
class Certificate:
    """Machine-checkable evidence bundle; see :func:`recheck`."""

    kind: str
    scanned: int
    evidence: dict
    basis: Optional[dict] = None
    tool_version: str = TOOL_VERSION
    verdict_scope: str = VERDICT_SCOPE

    @property
    def is_refutation(self) -> bool:
        if self.kind in (GAP_CRITERION, BIVARIATE_CRITERION, SIGNFLIP_CONSTRUCTION):
            return False
        if self.kind == FORMAL_REFUTATION:
            return True
        return self.evidence.get("outcome") in ("rank_exceeded", "refuted")

    def to_obj(self) -> dict:
        return {
            "kind": self.kind,
            "scanned": self.scanned,
            "evidence": self.evidence,
            "basis": self.basis,
            "tool_version": self.tool_version,
            "verdict_scope": self.verdict_scope,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_obj())

    @staticmethod
    def from_obj(obj: dict) -> "Certificate":
        try:
            kind = obj["kind"]
            if kind not in KINDS:
                raise SchemaError(f"unknown certificate kind {kind!r}")
            return Certificate(kind, int(obj["scanned"]), dict(obj["evidence"]),
                               obj.get("basis"),
                               obj.get("tool_version", TOOL_VERSION),
                               obj.get("verdict_scope", VERDICT_SCOPE))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad certificate object: {exc}") from None

    @staticmethod
    def load(path) -> "Certificate":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"not a certificate file: {exc}") from None
        return Certificate.from_obj(obj)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")


def _nstr(x, precision: int) -> str:
    with workprec(precision):
        return mpmath.nstr(mpmath.mpf(x), 12)


# ---------------------------------------------------------------------------
# Finite-basis scan
# ---------------------------------------------------------------------------

def finite_basis_certificate(exponents, rank_bound: int,
                             basis: Optional[SymbolBasis] = None) -> Certificate:
    """Scan the exponent stream tracking lattice rank against the bound.

    Accepts a :class:`FormalSeries` (its basis and stored exponents are
    used), a sequence of exponents over an explicit basis, or a sequence of
    positive integer indices n (scanned as log n over a prime-log basis).
    Rank exceeding the bound is refutation evidence (no series over these
    exponents can formally satisfy any difference-differential equation,
    modulo the scanned-prefix caveat); otherwise the certificate records
    where the rank stabilized.
    """
    if isinstance(exponents, FormalSeries):
        basis = exponents.basis
        exponents = [e for e, _ in exponents.terms]
    else:
        exponents = list(exponents)
        if exponents and isinstance(exponents[0], int):
            from .lattice import log_basis_for_indices
            precision = basis.precision if basis is not None else 128
            basis, table = log_basis_for_indices(exponents, precision)
            exponents = [table[n] for n in exponents]
    if basis is None:
        raise ValueError("a symbol basis is required for exponent streams")
    scan = RankScan(basis)
    exceeded_at = None
    for e in exponents:
        rank = scan.add(e)
        if rank > rank_bound and exceeded_at is None:
            exceeded_at = len(scan.exponents)
    lattice = scan.finish()
    evidence = {
        "rank_bound": rank_bound,
        "exponents": [exponent_to_obj(e) for e in scan.exponents],
        "rank_history": [list(h) for h in scan.history],
        "final_rank": lattice.rank,
        "generators": [exponent_to_obj(g) for g in lattice.generators],
        "outcome": "rank_exceeded" if exceeded_at is not None else "rank_stabilized",
        "exceeded_at": exceeded_at,
        "stable_since": scan.history[-1][0] if scan.history else 0,
    }
    return Certificate(FINITE_BASIS_REFUTATION, len(scan.exponents), evidence,
                       basis_to_obj(basis))


def _recheck_finite_basis(cert: Certificate) -> list[str]:
    basis = obj_to_basis(cert.basis)
    exponents = [obj_to_exponent(o) for o in cert.evidence["exponents"]]
    fresh = finite_basis_certificate(exponents, cert.evidence["rank_bound"], basis)
    return _diff_evidence(fresh.evidence, cert.evidence)


# ---------------------------------------------------------------------------
# Gap-ratio criterion
# ---------------------------------------------------------------------------

def gap_certificate(exponents: Sequence[Exponent], ratio_threshold: Fraction,
                    basis: SymbolBasis) -> Certificate:
    """Ratio envelope of consecutive exponents with threshold exceedances."""
    stats = gap_ratios(exponents, basis)
    with workprec(basis.precision):
        thr = mpmath.mpf(ratio_threshold.numerator) / ratio_threshold.denominator
        exceed = [i for i, r in enumerate(stats.ratios) if r > thr]
    evidence = {
        "ratio_threshold": frac_str(Fraction(ratio_threshold)),
        "exponents": [exponent_to_obj(e) for e in exponents],
        "dropped_prefix": stats.dropped_prefix,
        "ratios": [_nstr(r, basis.precision) for r in stats.ratios],
        "exact_ratios": [None if q is None else frac_str(q) for q in stats.exact],
        "envelope": [_nstr(r, basis.precision) for r in stats.envelope],
        "exceedances": exceed,
    }
    return Certificate(GAP_CRITERION, len(exponents), evidence, basis_to_obj(basis))


def _recheck_gap(cert: Certificate) -> list[str]:
    basis = obj_to_basis(cert.basis)
    exponents = [obj_to_exponent(o) for o in cert.evidence["exponents"]]
    fresh = gap_certificate(exponents, parse_frac(cert.evidence["ratio_threshold"]), basis)
    return _diff_evidence(fresh.evidence, cert.evidence)


# ---------------------------------------------------------------------------
# Coefficient-field families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootOfUnity:
    order: int


@dataclass(frozen=True)
class PrimeSquareRoot:
    prime: int


@dataclass(frozen=True)
class RationalCoeff:
    value: Fraction


@dataclass(frozen=True)
class UserAsserted:
    note: str


CoefficientTag = Union[RootOfUnity, PrimeSquareRoot, RationalCoeff, UserAsserted]


def coefficient_field_certificate(tags: Iterable[CoefficientTag],
                                  distinct_bound: int = 8) -> Certificate:
    """Field-theoretic obstruction evidence from tagged coefficient families.

    Unboundedly many distinct root-of-unity orders (or distinct prime square
    roots) cannot lie in one finitely generated field; at scan scale,
    "unbounded" means more distinct values than ``distinct_bound``.  Streams
    of plain rationals yield no obstruction from this test.
    """
    orders: set[int] = set()
    primes: set[int] = set()
    asserted: list[str] = []
    rational_count = 0
    count = 0
    for tag in tags:
        count += 1
        if isinstance(tag, RootOfUnity):
            if tag.order < 1:
                raise UnknownFamily(f"bad root-of-unity order {tag.order}")
            if tag.order > 2:
                orders.add(tag.order)
            else:
                rational_count += 1  # orders 1 and 2 are just +-1
        elif isinstance(tag, PrimeSquareRoot):
            from .lattice import factorize
            factors, _ = factorize(tag.prime)
            if list(factors.items()) != [(tag.prime, 1)]:
                raise UnknownFamily(f"{tag.prime} is not prime")
            primes.add(tag.prime)
        elif isinstance(tag, RationalCoeff):
            rational_count += 1
        elif isinstance(tag, UserAsserted):
            asserted.append(tag.note)
        else:
            raise UnknownFamily(f"untagged coefficient {tag!r}")
    refuted = (len(orders) > distinct_bound or len(primes) > distinct_bound
               or bool(asserted))
    if asserted:
        reason = "user-asserted basis-free subsystem"
    elif len(orders) > distinct_bound:
        reason = (f"{len(orders)} distinct root-of-unity orders exceed the "
                  f"bound {distinct_bound}")
    elif len(primes) > distinct_bound:
        reason = (f"{len(primes)} distinct prime square roots exceed the "
                  f"bound {distinct_bound}")
    else:
        reason = "no obstruction from this test"
    evidence = {
        "distinct_bound": distinct_bound,
        "root_of_unity_orders": sorted(orders),
        "prime_square_roots": sorted(primes),
        "rational_count": rational_count,
        "user_asserted": asserted,
        "outcome": "refuted" if refuted else "no_obstruction",
        "reason": reason,
    }
    return Certificate(COEFFICIENT_FIELD, count, evidence)


def _recheck_coefficient_field(cert: Certificate) -> list[str]:
    ev = cert.evidence
    problems = []
    refuted = (len(ev["root_of_unity_orders"]) > ev["distinct_bound"]
               or len(ev["prime_square_roots"]) > ev["distinct_bound"]
               or bool(ev["user_asserted"]))
    outcome = "refuted" if refuted else "no_obstruction"
    if outcome != ev["outcome"]:
        problems.append(f"outcome: recomputed {outcome!r} != claimed {ev['outcome']!r}")
    return problems


# ---------------------------------------------------------------------------
# Bivariate degree/exponent criterion
# ---------------------------------------------------------------------------

def bivariate_certificate(degrees: Sequence[int], exponents: Sequence,
                          basis: Optional[SymbolBasis] = None,
                          ratio_threshold: Fraction = Fraction(100),
                          precision: int = 128) -> Certificate:
    """Cluster diagnostics for log(degree)/log(exponent) plus gap evidence.

    The criterion needs (a) no nonzero rational accumulation point of the
    ratio sequence, and (b) either unbounded lattice rank or unbounded
    exponent gaps at scan scale.  Everything is reported honestly even when
    the criterion fails.
    """
    if len(degrees) != len(exponents):
        raise ValueError("degrees and exponents must align")
    symbolic = all(isinstance(e, Exponent) for e in exponents) and basis is not None
    with workprec(precision):
        if symbolic:
            values = [basis.exponent_value(e) for e in exponents]
        else:
            values = [mpmath.mpf(str(e)) for e in exponents]
        ratios = []
        skipped = []
        for i, (m, lam) in enumerate(zip(degrees, values)):
            if m < 1:
                raise ValueError("degrees must be positive integers")
            if lam <= 0 or abs(mpmath.log(lam)) < mpmath.mpf(2) ** (-precision // 2):
                skipped.append(i)
                continue
            ratios.append(float(mpmath.log(m) / mpmath.log(lam)))
        tail = ratios[max(0, len(ratios) * 3 // 4):]
        accumulation = None
        if tail:
            mean = sum(tail) / len(tail)
            spread = max(tail) - min(tail)
            if spread < 0.05:
                cand = Fraction(mean).limit_denominator(12)
                if cand != 0 and abs(float(cand) - mean) < 0.01:
                    accumulation = cand
        drift = None
        if len(tail) >= 3 and all(b > a for a, b in zip(tail, tail[1:])):
            drift = "to_infinity"
        elif len(tail) >= 3 and all(b < a for a, b in zip(tail, tail[1:])) and tail[-1] < 0.5:
            drift = "to_zero"
        hist: dict[str, int] = {}
        for r in ratios:
            key = f"{r:.1f}"
            hist[key] = hist.get(key, 0) + 1
    rank_unbounded = False
    rank_history = []
    if symbolic:
        scan = RankScan(basis)
        for e in exponents:
            scan.add(e)
        rank_history = [list(h) for h in scan.history]
        # rank still growing in the last half of the scan
        rank_unbounded = bool(scan.history) and scan.history[-1][0] > len(exponents) // 2
    gap_exceeded = False
    if symbolic:
        stats = gap_ratios(list(exponents), basis)
        with workprec(precision):
            thr = mpmath.mpf(ratio_threshold.numerator) / ratio_threshold.denominator
            gap_exceeded = any(r > thr for r in stats.ratios)
    criterion_met = accumulation is None and (rank_unbounded or gap_exceeded)
    evidence = {
        "degrees": list(degrees),
        "exponent_values": [_nstr(v, precision) for v in values],
        "log_ratios": [f"{r:.6f}" for r in ratios],
        "skipped_indices": skipped,
        "histogram": dict(sorted(hist.items())),
        "rational_accumulation": None if accumulation is None else frac_str(accumulation),
        "drift": drift,
        "rank_history": rank_history,
        "condition_no_finite_basis_at_scan": rank_unbounded,
        "condition_gap_at_scan": gap_exceeded,
        "criterion_met": criterion_met,
        "note": "purely formal data; convergence is not modelled",
    }
    payload_basis = basis_to_obj(basis) if symbolic else None
    if symbolic:
        evidence["exponents"] = [exponent_to_obj(e) for e in exponents]
    return Certificate(BIVARIATE_CRITERION, len(degrees), evidence, payload_basis)


def _recheck_bivariate(cert: Certificate) -> list[str]:
    ev = cert.evidence
    if "exponents" in ev and cert.basis is not None:
        basis = obj_to_basis(cert.basis)
        exponents = [obj_to_exponent(o) for o in ev["exponents"]]
    else:
        basis = None
        exponents = [mpmath.mpf(v) for v in ev["exponent_values"]]
    fresh = bivariate_certificate(ev["degrees"], exponents, basis)
    return _diff_evidence(fresh.evidence, ev)


# ---------------------------------------------------------------------------
# Sign-flip construction
# ---------------------------------------------------------------------------

def default_gap_rule(i: int) -> int:
    """Target positions 2^(i*i): consecutive ratios 2^(2i-1) grow unboundedly."""
    return 2 ** (i * i)


def signflip_construct(coefficients: Sequence[Fraction],
                       gap_rule: Callable[[int], int] = default_gap_rule
                       ) -> tuple[list[Fraction], list[tuple[int, Fraction]], Certificate]:
    """Select a gap subseries Q and flip its signs inside P.

    Returns (P1, Q, certificate) with P1 = P - 2Q exactly on the scan; when
    a rule position lands on a zero coefficient the selection advances to
    the next nonzero position.
    """
    coeffs = [Fraction(c) for c in coefficients]
    scan = len(coeffs)
    positions: list[int] = []
    i = 1
    while True:
        target = gap_rule(i)
        if positions and target <= positions[-1]:
            target = positions[-1] + 1
        pos = next((p for p in range(target, scan) if coeffs[p] != 0), None)
        if pos is None:
            break
        positions.append(pos)
        i += 1
    if len(positions) < 2:
        raise InsufficientNonzeroTerms(
            f"gap rule selected only {len(positions)} nonzero positions in a "
            f"scan of {scan}")
    flipped = list(coeffs)
    q_terms = []
    for p in positions:
        q_terms.append((p, coeffs[p]))
        flipped[p] = -coeffs[p]
    for p, a in q_terms:
        assert flipped[p] + 2 * a == coeffs[p]
    ratios = [frac_str(Fraction(positions[j], positions[j - 1]))
              for j in range(1, len(positions))]
    evidence = {
        "original": [frac_str(c) for c in coeffs],
        "positions": positions,
        "flipped_values": [frac_str(flipped[p]) for p in positions],
        "identity": "P1 = P - 2Q checked exactly on the scan",
        "position_ratios": ratios,
        "outcome": "constructed",
    }
    cert = Certificate(SIGNFLIP_CONSTRUCTION, scan, evidence)
    return flipped, q_terms, cert


def _recheck_signflip(cert: Certificate) -> list[str]:
    ev = cert.evidence
    coeffs = [parse_frac(c) for c in ev["original"]]
    problems = []
    for p, fv in zip(ev["positions"], ev["flipped_values"]):
        if parse_frac(fv) != -coeffs[p]:
            problems.append(f"flip at {p}: {fv} != -({coeffs[p]})")
    for j in range(1, len(ev["positions"])):
        expect = frac_str(Fraction(ev["positions"][j], ev["positions"][j - 1]))
        if ev["position_ratios"][j - 1] != expect:
            problems.append(f"ratio #{j}: {ev['position_ratios'][j-1]} != {expect}")
    return problems


# ---------------------------------------------------------------------------
# Standalone re-verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    mismatches: tuple[str, ...] = ()
    note: Optional[str] = None


def _diff_evidence(fresh: dict, claimed: dict) -> list[str]:
    problems = []
    for key in sorted(set(fresh) | set(claimed)):
        if fresh.get(key) != claimed.get(key):
            problems.append(f"{key}: recomputed {fresh.get(key)!r} != claimed {claimed.get(key)!r}")
    return problems


def recheck(cert: Certificate) -> VerifyResult:
    """Recompute the certificate's evidence from its own payload."""
    handlers = {
        FINITE_BASIS_REFUTATION: _recheck_finite_basis,
        GAP_CRITERION: _recheck_gap,
        COEFFICIENT_FIELD: _recheck_coefficient_field,
        BIVARIATE_CRITERION: _recheck_bivariate,
        SIGNFLIP_CONSTRUCTION: _recheck_signflip,
        FORMAL_SATISFACTION: _recheck_formal,
        FORMAL_REFUTATION: _recheck_formal,
    }
    handler = handlers.get(cert.kind)
    if handler is None:
        return VerifyResult(False, (f"unknown kind {cert.kind!r}",))
    problems = handler(cert)
    note = None
    if cert.tool_version != TOOL_VERSION:
        note = (f"certificate written by {cert.tool_version!r}, "
                f"verified by {TOOL_VERSION!r}")
    return VerifyResult(not problems, tuple(problems), note)


def _recheck_formal(cert: Certificate) -> list[str]:
    # late import: the satisfaction checks live in higher-level modules
    from . import transforms
    ev = cert.evidence
    check = ev.get("check")
    if check == "hilbert":
        fresh = transforms.verify_hilbert_zeta(
            ev["n"], ev["max_shift"], ev["max_weight_ops"],
            ds_max=ev["max_s_derivatives"], precision=ev["precision_bits"])
        return _diff_evidence(fresh.evidence, ev)
    if check == "substitute":
        return _recheck_substitution(cert)
    if check == "rescale":
        return transforms.recheck_rescale(cert)
    return [f"unknown formal check {check!r}"]


def _recheck_substitution(cert: Certificate) -> list[str]:
    from .formal_eval import substitute
    from .grammar import parse_diffpoly
    from .io import obj_to_series
    ev = cert.evidence
    phi = obj_to_series(ev["series"])
    F = parse_diffpoly(ev["equation"], phi.basis)
    horizon = None if ev.get("horizon") is None else obj_to_exponent(ev["horizon"])
    residual = substitute(F, phi, horizon)
    problems = []
    verdict = "zero" if residual.is_zero else "nonzero"
    if verdict != ev["residual"]:
        problems.append(f"residual: recomputed {verdict!r} != claimed {ev['residual']!r}")
    lead = None
    if not residual.is_zero:
        e, p = residual.leading
        lead = {"exponent": exponent_to_obj(e), "coeff": str(p.constant())}
    if lead != ev.get("leading"):
        problems.append(f"leading: recomputed {lead!r} != claimed {ev.get('leading')!r}")
    if "threshold_report" in ev:
        from .formal_eval import forcing_threshold
        report = forcing_threshold(F, phi)
        fresh = threshold_report_obj(report)
        problems.extend(f"threshold_report.{p}" for p in
                        _diff_evidence(fresh, ev["threshold_report"]))
    return problems


def substitution_certificate(F, phi: FormalSeries, horizon=None,
                             threshold_report=None) -> Certificate:
    """FormalSatisfaction / FormalRefutation evidence for one substitution."""
    from .formal_eval import substitute
    from .grammar import pretty
    from .io import series_to_obj
    residual = substitute(F, phi, horizon)
    evidence = {
        "check": "substitute",
        "series": series_to_obj(phi),
        "equation": pretty(F),
        "horizon": None if residual.horizon is None else exponent_to_obj(residual.horizon),
        "residual": "zero" if residual.is_zero else "nonzero",
    }
    if not residual.is_zero:
        e, p = residual.leading
        evidence["leading"] = {"exponent": exponent_to_obj(e), "coeff": str(p.constant())}
    if threshold_report is not None:
        evidence["threshold_report"] = threshold_report_obj(threshold_report)
    kind = FORMAL_SATISFACTION if residual.is_zero else FORMAL_REFUTATION
    return Certificate(kind, len(phi.terms), evidence, basis_to_obj(phi.basis))


def threshold_report_obj(report) -> dict:
    """Exact JSON form of a forcing-threshold report."""
    return {
        "stability_exponent": exponent_to_obj(report.stability_exponent),
        "stability_prefix": report.stability_prefix,
        "min_partial_exponent": exponent_to_obj(report.min_partial_exponent),
        "root_bound": frac_str(report.root_bound),
        "total_degree": report.total_degree,
        "first_exponent": exponent_to_obj(report.first_exponent),
        "threshold": report.threshold,
        "verified_indices": list(report.verified_indices),
        "horizon": None if report.horizon is None else exponent_to_obj(report.horizon),
    }
