"""Exact generalized Dirichlet series arithmetic.

A series is a finite, exponent-sorted list of terms

    sum_i  p_i(x) * e^(-lambda_i * s)

where every exponent ``lambda_i`` is a rational linear combination of the
positive generators of a :class:`SymbolBasis` plus a rational constant, and
every coefficient ``p_i(x)`` is a polynomial in ``x`` whose coefficients are
exact multivariate polynomials over the basis symbols and damping factors
``e^(-nu)``.  The plain (univariate) case is the x-degree-0 special case.

Each series carries a truncation bound: terms with larger exponents are
unknown, and every operation propagates the bound it can actually justify.
A ``None`` bound means the series is known in full (e.g. a finite prefix
treated as an exact object, or a constant).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from .errors import BadBasis, BadBound, BasisMismatch, PrecisionTieWarning
from .numeric import (
    DEFAULT_PRECISION,
    decimal_str_to_mpf,
    fraction_to_mpf,
    tie_threshold,
)

RationalLike = Union[int, Fraction]

#: Reserved name for the constant coordinate of an exponent (numeric value 1).
ONE = "ONE"


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    raise TypeError(f"expected an exact rational, got {type(v).__name__}")


# ---------------------------------------------------------------------------
# Exponents
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Exponent:
    """Rational lattice vector over the basis symbols plus a rational constant.

    The constant part is the coordinate of the distinguished unit symbol
    ``ONE``; it encodes integer exponents of plain power series so that
    power series and Dirichlet series share one representation.
    """

    coords: tuple[tuple[str, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    def __post_init__(self):
        # exponents key every hot dict in the package; precompute an
        # int-tuple identity key so hashing and equality avoid Fraction's
        # slow numeric-tower dispatch
        key = (tuple((n, q.numerator, q.denominator) for n, q in self.coords),
               self.const.numerator, self.const.denominator)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Exponent):
            return NotImplemented
        return self._hash == other._hash and self._key == other._key

    @staticmethod
    def make(coords: Mapping[str, RationalLike] | None = None,
             const: RationalLike = 0) -> "Exponent":
        c = _as_fraction(const)
        items = {}
        for name, q in (coords or {}).items():
            q = _as_fraction(q)
            if name == ONE:
                c += q
                continue
            if q != 0:
                items[name] = items.get(name, Fraction(0)) + q
        canon = tuple(sorted((n, q) for n, q in items.items() if q != 0))
        return Exponent(canon, c)

    @staticmethod
    def zero() -> "Exponent":
        return Exponent()

    @staticmethod
    def of(name: str, q: RationalLike = 1) -> "Exponent":
        return Exponent.make({name: q})

    @staticmethod
    def constant(q: RationalLike) -> "Exponent":
        return Exponent.make({}, q)

    @property
    def is_zero(self) -> bool:
        return not self.coords and self.const == 0

    def coord(self, name: str) -> Fraction:
        if name == ONE:
            return self.const
        for n, q in self.coords:
            if n == name:
                return q
        return Fraction(0)

    def symbols(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.coords)

    def sort_key(self):
        """Exact total order key used for lexicographic tie-breaking."""
        return (self.const, self.coords)

    def __add__(self, other: "Exponent") -> "Exponent":
        items = dict(self.coords)
        for n, q in other.coords:
            items[n] = items.get(n, Fraction(0)) + q
        canon = tuple(sorted((n, q) for n, q in items.items() if q != 0))
        return Exponent(canon, self.const + other.const)

    def __neg__(self) -> "Exponent":
        return Exponent(tuple((n, -q) for n, q in self.coords), -self.const)

    def __sub__(self, other: "Exponent") -> "Exponent":
        return self + (-other)

    def __mul__(self, scalar: RationalLike) -> "Exponent":
        q = _as_fraction(scalar)
        if q == 0:
            return Exponent()
        return Exponent(tuple((n, c * q) for n, c in self.coords), self.const * q)

    __rmul__ = __mul__

    def __str__(self) -> str:
        pieces = []
        for n, q in self.coords:
            body = n if abs(q) == 1 else f"{abs(q)}*{n}"
            pieces.append(("-" if q < 0 else "+", body))
        if self.const != 0 or not pieces:
            pieces.append(("-" if self.const < 0 else "+", str(abs(self.const))))
        sign, first = pieces[0]
        text = ("-" if sign == "-" else "") + first
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text


# ---------------------------------------------------------------------------
# Symbol basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolBasis:
    """Named positive generators with arbitrary-precision numeric values.

    ``independence_assumed`` documents (it does not verify) that the numeric
    values are linearly independent over the rationals together with 1.
    The reserved unit symbol ``ONE`` is always available implicitly through
    an exponent's constant part and may not be declared.
    """

    symbols: tuple[str, ...]
    values: tuple[str, ...]
    precision: int = DEFAULT_PRECISION
    independence_assumed: bool = True
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if len(self.symbols) != len(set(self.symbols)):
            raise BadBasis("symbol names must be unique")
        if ONE in self.symbols:
            raise BadBasis(f"{ONE!r} is reserved for the constant coordinate")
        if len(self.values) != len(self.symbols):
            raise BadBasis("one numeric value per symbol required")
        if self.precision <= 0:
            raise BadBasis("precision must be positive")
        for name in self.symbols:
            if self.value_of(name) <= 0:
                raise BadBasis(f"symbol {name!r} must have a strictly positive value")

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[str, str]],
                   precision: int = DEFAULT_PRECISION,
                   independence_assumed: bool = True) -> "SymbolBasis":
        pairs = list(pairs)
        return SymbolBasis(tuple(n for n, _ in pairs), tuple(str(v) for _, v in pairs),
                           precision, independence_assumed)

    @staticmethod
    def unit(precision: int = DEFAULT_PRECISION) -> "SymbolBasis":
        """Basis with no generators; exponents are plain rationals."""
        return SymbolBasis((), (), precision)

    def value_of(self, name: str):
        key = ("sym", name)
        if key not in self._cache:
            try:
                idx = self.symbols.index(name)
            except ValueError:
                raise BadBasis(f"unknown symbol {name!r}") from None
            self._cache[key] = decimal_str_to_mpf(self.values[idx], self.precision)
        return self._cache[key]

    def has_symbol(self, name: str) -> bool:
        return name in self.symbols

    def exponent_value(self, e: Exponent):
        key = ("exp", e)
        if key not in self._cache:
            from .numeric import workprec
            with workprec(self.precision):
                total = fraction_to_mpf(e.const, self.precision)
                for n, q in e.coords:
                    total += fraction_to_mpf(q, self.precision) * self.value_of(n)
            self._cache[key] = total
        return self._cache[key]

    def validate_exponent(self, e: Exponent) -> None:
        for n, _ in e.coords:
            if n not in self.symbols:
                raise BadBasis(f"exponent references unknown symbol {n!r}")

    def float_value(self, e: Exponent) -> float:
        key = ("flt", e)
        if key not in self._cache:
            self._cache[key] = float(self.exponent_value(e))
        return self._cache[key]

    def compare(self, a: Exponent, b: Exponent) -> int:
        """Total order: numeric at precision P, exact lexicographic on ties.

        A tie between structurally distinct exponents raises a
        :class:`PrecisionTieWarning` diagnostic before falling back.
        Comparisons far from a tie are decided on cached float shadows of
        the precision-P values; the margin dwarfs the double rounding.
        """
        if a == b:
            return 0
        fa, fb = self.float_value(a), self.float_value(b)
        margin = 1e-9 * max(1.0, abs(fa), abs(fb))
        if fa - fb > margin:
            return 1
        if fb - fa > margin:
            return -1
        from .numeric import workprec
        with workprec(self.precision):
            d = self.exponent_value(a) - self.exponent_value(b)
        if abs(d) <= tie_threshold(self.precision):
            warnings.warn(
                f"exponent comparison tie within 2^-{self.precision}: "
                f"({a}) vs ({b}); using exact lexicographic fallback",
                PrecisionTieWarning, stacklevel=2)
            ka, kb = a.sort_key(), b.sort_key()
            return -1 if ka < kb else (1 if ka > kb else 0)
        return -1 if d < 0 else 1

    def ordering_key(self, e: Exponent):
        return (self.exponent_value(e), e.sort_key())


def compare_bounds(basis: SymbolBasis, a: Optional[Exponent], b: Optional[Exponent]) -> int:
    """Compare truncation bounds where ``None`` means plus infinity."""
    if a is None and b is None:
        return 0
    if a is None:
        return 1
    if b is None:
        return -1
    return basis.compare(a, b)


def meet_bounds(basis: SymbolBasis, a: Optional[Exponent], b: Optional[Exponent]) -> Optional[Exponent]:
    return a if compare_bounds(basis, a, b) <= 0 else b


# ---------------------------------------------------------------------------
# Coefficients
# ---------------------------------------------------------------------------

# A coefficient monomial is a pair (symbol powers, damping exponent):
#   * symbol powers: sorted tuple of (name, positive int) for plain symbol
#     factors such as L2^2;
#   * damping exponent nu: the factor e^(-nu), the multiplicative normal
#     form of all shift multipliers.  e^(-nu1) * e^(-nu2) = e^(-(nu1+nu2))
#     is applied eagerly, so inverse shifts cancel exactly.
Monomial = tuple[tuple[tuple[str, int], ...], Exponent]

_UNIT_MONO: Monomial = ((), Exponent())


def _mono_key(m: Monomial):
    syms, damp = m
    return (syms, damp.sort_key())


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    pa, da = a
    pb, db = b
    powers = dict(pa)
    for n, k in pb:
        powers[n] = powers.get(n, 0) + k
    syms = tuple(sorted((n, k) for n, k in powers.items() if k != 0))
    return (syms, da + db)


def _mono_str(m: Monomial) -> str:
    syms, damp = m
    parts = []
    for n, k in syms:
        parts.append(n if k == 1 else f"{n}^{k}")
    if not damp.is_zero:
        parts.append(f"exp(-({damp}))")
    return "*".join(parts)


@dataclass(frozen=True)
class Coefficient:
    """Sparse polynomial over the basis symbols and damping factors."""

    terms: tuple[tuple[Monomial, Fraction], ...] = ()

    @staticmethod
    def _from_dict(d: dict) -> "Coefficient":
        items = tuple(sorted(((m, q) for m, q in d.items() if q != 0),
                             key=lambda t: _mono_key(t[0])))
        return Coefficient(items)

    @staticmethod
    def zero() -> "Coefficient":
        return Coefficient()

    @staticmethod
    def from_fraction(q: RationalLike) -> "Coefficient":
        q = _as_fraction(q)
        if q == 0:
            return Coefficient()
        return Coefficient(((_UNIT_MONO, q),))

    @staticmethod
    def one() -> "Coefficient":
        return Coefficient.from_fraction(1)

    @staticmethod
    def from_symbol(name: str, power: int = 1) -> "Coefficient":
        if power == 0:
            return Coefficient.one()
        return Coefficient((((((name, power),), Exponent()), Fraction(1)),))

    @staticmethod
    def from_exponent(e: Exponent) -> "Coefficient":
        """The exponent as a linear polynomial in the symbols (exact)."""
        out = {}
        if e.const != 0:
            out[_UNIT_MONO] = e.const
        for n, q in e.coords:
            out[(((n, 1),), Exponent())] = q
        return Coefficient._from_dict(out)

    @staticmethod
    def damping(nu: Exponent) -> "Coefficient":
        """The factor e^(-nu); the multiplier M(lam, h) is damping(h*lam)."""
        return Coefficient((((() , nu), Fraction(1)),))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_rational(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0] == _UNIT_MONO)

    def as_fraction(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        if not self.is_rational:
            raise ValueError("coefficient is not a plain rational")
        return self.terms[0][1]

    def symbols(self) -> set:
        out = set()
        for (syms, damp), _ in self.terms:
            out.update(n for n, _ in syms)
            out.update(damp.symbols())
        return out

    def __add__(self, other: "Coefficient") -> "Coefficient":
        d = dict(self.terms)
        for m, q in other.terms:
            d[m] = d.get(m, Fraction(0)) + q
        return Coefficient._from_dict(d)

    def __neg__(self) -> "Coefficient":
        return Coefficient(tuple((m, -q) for m, q in self.terms))

    def __sub__(self, other: "Coefficient") -> "Coefficient":
        return self + (-other)

    def __mul__(self, other: "Coefficient") -> "Coefficient":
        d = {}
        for ma, qa in self.terms:
            for mb, qb in other.terms:
                m = _mono_mul(ma, mb)
                d[m] = d.get(m, Fraction(0)) + qa * qb
        return Coefficient._from_dict(d)

    def scale(self, q: RationalLike) -> "Coefficient":
        q = _as_fraction(q)
        if q == 0:
            return Coefficient()
        return Coefficient(tuple((m, c * q) for m, c in self.terms))

    def __pow__(self, k: int) -> "Coefficient":
        if k < 0:
            raise ValueError("negative coefficient powers are not defined")
        out = Coefficient.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def numeric(self, basis: SymbolBasis):
        """Explicitly lossy evaluation at the basis values, precision P."""
        import mpmath

        from .numeric import workprec
        with workprec(basis.precision):
            total = mpmath.mpf(0)
            for (syms, damp), q in self.terms:
                v = fraction_to_mpf(q, basis.precision)
                for n, k in syms:
                    v *= basis.value_of(n) ** k
                if not damp.is_zero:
                    v *= mpmath.exp(-basis.exponent_value(damp))
                total += v
            return total

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for m, q in self.terms:
            ms = _mono_str(m)
            if ms:
                body = ms if abs(q) == 1 else f"{abs(q)}*{ms}"
            else:
                body = str(abs(q))
            parts.append(("-" if q < 0 else "+", body))
        sign, first = parts[0]
        text = ("-" if sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


def _as_coefficient(v) -> Coefficient:
    if isinstance(v, Coefficient):
        return v
    return Coefficient.from_fraction(_as_fraction(v))


# ---------------------------------------------------------------------------
# Polynomials in x with Coefficient entries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class XPoly:
    """Univariate polynomial in x over :class:`Coefficient` entries."""

    coeffs: tuple[tuple[int, Coefficient], ...] = ()

    @staticmethod
    def _from_dict(d: dict) -> "XPoly":
        return XPoly(tuple(sorted((k, c) for k, c in d.items() if not c.is_zero)))

    @staticmethod
    def zero() -> "XPoly":
        return XPoly()

    @staticmethod
    def from_coefficient(c) -> "XPoly":
        c = _as_coefficient(c)
        if c.is_zero:
            return XPoly()
        return XPoly(((0, c),))

    @staticmethod
    def monomial(degree: int, c) -> "XPoly":
        c = _as_coefficient(c)
        if degree < 0:
            raise ValueError("x-degree must be non-negative")
        if c.is_zero:
            return XPoly()
        return XPoly(((degree, c),))

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> Optional[int]:
        """Exact x-degree, ``None`` for the zero polynomial."""
        return self.coeffs[-1][0] if self.coeffs else None

    def coefficient(self, degree: int) -> Coefficient:
        for k, c in self.coeffs:
            if k == degree:
                return c
        return Coefficient.zero()

    def constant(self) -> Coefficient:
        return self.coefficient(0)

    def __add__(self, other: "XPoly") -> "XPoly":
        d = dict(self.coeffs)
        for k, c in other.coeffs:
            d[k] = d.get(k, Coefficient.zero()) + c
        return XPoly._from_dict(d)

    def __neg__(self) -> "XPoly":
        return XPoly(tuple((k, -c) for k, c in self.coeffs))

    def __sub__(self, other: "XPoly") -> "XPoly":
        return self + (-other)

    def __mul__(self, other: "XPoly") -> "XPoly":
        d = {}
        for ka, ca in self.coeffs:
            for kb, cb in other.coeffs:
                k = ka + kb
                prod = ca * cb
                d[k] = d.get(k, Coefficient.zero()) + prod
        return XPoly._from_dict(d)

    def scale(self, c) -> "XPoly":
        c = _as_coefficient(c)
        d = {k: v * c for k, v in self.coeffs}
        return XPoly._from_dict(d)

    def x_log_derivative(self) -> "XPoly":
        """x * d/dx, the degree-weighting operator."""
        return XPoly._from_dict({k: c.scale(k) for k, c in self.coeffs})

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for k, c in self.coeffs:
            cs = str(c)
            if k == 0:
                parts.append(cs)
            else:
                xs = "x" if k == 1 else f"x^{k}"
                parts.append(xs if cs == "1" else f"({cs})*{xs}")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# Formal series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FormalSeries:
    """Exponent-sorted term list with an explicit validity horizon."""

    basis: SymbolBasis
    terms: tuple[tuple[Exponent, XPoly], ...]
    truncation: Optional[Exponent]

    @property
    def is_zero(self) -> bool:
        """True when no term is stored (zero up to the truncation bound)."""
        return not self.terms

    @property
    def is_exact(self) -> bool:
        return self.truncation is None

    def exponents(self) -> tuple[Exponent, ...]:
        return tuple(e for e, _ in self.terms)

    def min_exponent(self) -> Optional[Exponent]:
        return self.terms[0][0] if self.terms else None

    def degrees(self) -> tuple[int, ...]:
        """Exact x-degrees m_i of the stored coefficients."""
        return tuple(p.degree for _, p in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            bound = "inf" if self.truncation is None else str(self.truncation)
            return f"0 (up to {bound})"
        chunks = [f"({p}) e^(-({e})s)" for e, p in self.terms]
        bound = "inf" if self.truncation is None else str(self.truncation)
        return " + ".join(chunks) + f"  [valid to {bound}]"


def _effective_min(s: FormalSeries) -> Optional[Exponent]:
    """Least exponent any true term of ``s`` can have (None = series is 0)."""
    if s.terms:
        return s.terms[0][0]
    return s.truncation  # zero up to T: true terms all exceed T


def _sorted_terms(basis: SymbolBasis, accum: dict) -> tuple:
    keyed = []
    for e, p in accum.items():
        if p.is_zero:
            continue
        keyed.append((basis.exponent_value(e), e.sort_key(), e, p))
    keyed.sort(key=lambda t: (t[0], t[1]))
    thr = tie_threshold(basis.precision)
    from .numeric import workprec
    for i in range(len(keyed) - 1):
        with workprec(basis.precision):
            gap = abs(keyed[i + 1][0] - keyed[i][0])
        if gap <= thr:
            warnings.warn(
                f"adjacent exponents tie within 2^-{basis.precision}: "
                f"({keyed[i][2]}) vs ({keyed[i + 1][2]}); order fixed lexicographically",
                PrecisionTieWarning, stacklevel=3)
    return tuple((e, p) for _, _, e, p in keyed)


def _build(basis: SymbolBasis, accum: dict, truncation: Optional[Exponent]) -> FormalSeries:
    terms = _sorted_terms(basis, accum)
    if truncation is not None:
        terms = tuple((e, p) for e, p in terms if basis.compare(e, truncation) <= 0)
    return FormalSeries(basis, terms, truncation)


def make_series(spec, basis: SymbolBasis, truncation: Optional[Exponent]) -> FormalSeries:
    """Build the canonical series from (exponent, coefficient[, x-degree]) items.

    Items with equal exponents are merged by addition; zero results are
    pruned.  Raises :class:`BadBasis` for unknown symbols and
    :class:`BadBound` for terms beyond the truncation bound.
    """
    accum: dict = {}
    for item in spec:
        if len(item) == 2:
            e, c = item
            xdeg = 0
        else:
            e, c, xdeg = item
        basis.validate_exponent(e)
        if isinstance(c, XPoly):
            poly = c
            if xdeg:
                poly = poly * XPoly.monomial(xdeg, 1)
        else:
            c = _as_coefficient(c)
            for n in c.symbols():
                if not basis.has_symbol(n):
                    raise BadBasis(f"coefficient references unknown symbol {n!r}")
            poly = XPoly.monomial(xdeg, c)
        if truncation is not None and basis.compare(e, truncation) > 0:
            raise BadBound(f"term exponent ({e}) exceeds the truncation bound ({truncation})")
        accum[e] = accum.get(e, XPoly.zero()) + poly
    return _build(basis, accum, truncation)


def zero_series(basis: SymbolBasis, truncation: Optional[Exponent] = None) -> FormalSeries:
    return FormalSeries(basis, (), truncation)


def constant_series(basis: SymbolBasis, c, xdegree: int = 0) -> FormalSeries:
    """An exactly known one-term series at exponent zero."""
    poly = XPoly.monomial(xdegree, c) if not isinstance(c, XPoly) else c
    if poly.is_zero:
        return zero_series(basis)
    return FormalSeries(basis, ((Exponent.zero(), poly),), None)


def _require_same_basis(a: FormalSeries, b: FormalSeries) -> None:
    if a.basis != b.basis:
        raise BasisMismatch("series are defined over different symbol bases")


def series_add(a: FormalSeries, b: FormalSeries) -> FormalSeries:
    _require_same_basis(a, b)
    accum: dict = {}
    for e, p in a.terms:
        accum[e] = accum.get(e, XPoly.zero()) + p
    for e, p in b.terms:
        accum[e] = accum.get(e, XPoly.zero()) + p
    bound = meet_bounds(a.basis, a.truncation, b.truncation)
    return _build(a.basis, accum, bound)


def series_neg(a: FormalSeries) -> FormalSeries:
    return FormalSeries(a.basis, tuple((e, -p) for e, p in a.terms), a.truncation)


def series_sub(a: FormalSeries, b: FormalSeries) -> FormalSeries:
    return series_add(a, series_neg(b))


def series_scale(a: FormalSeries, c) -> FormalSeries:
    """Multiply every term by a constant Coefficient (or rational)."""
    c = _as_coefficient(c)
    accum = {e: p.scale(c) for e, p in a.terms}
    return _build(a.basis, accum, a.truncation)


def series_scale_xpoly(a: FormalSeries, poly: XPoly) -> FormalSeries:
    """Multiply every term by a fixed polynomial in x (exponents unchanged)."""
    accum = {e: p * poly for e, p in a.terms}
    return _build(a.basis, accum, a.truncation)


def series_mul(a: FormalSeries, b: FormalSeries) -> FormalSeries:
    """Cauchy product by exponent addition, truncated to the provable bound."""
    _require_same_basis(a, b)
    basis = a.basis
    # An exactly-zero factor annihilates everything, with full knowledge.
    if a.is_zero and a.is_exact or b.is_zero and b.is_exact:
        return zero_series(basis)
    bounds = []
    if a.truncation is not None:
        m = _effective_min(b)
        if m is not None:
            bounds.append(a.truncation + m)
    if b.truncation is not None:
        m = _effective_min(a)
        if m is not None:
            bounds.append(b.truncation + m)
    bound: Optional[Exponent] = None
    for candidate in bounds:
        bound = candidate if bound is None else meet_bounds(basis, bound, candidate)
    accum: dict = {}
    for ea, pa in a.terms:
        for eb, pb in b.terms:
            e = ea + eb
            if bound is not None and basis.compare(e, bound) > 0:
                continue
            prod = pa * pb
            accum[e] = accum.get(e, XPoly.zero()) + prod
    return _build(basis, accum, bound)


def series_pow(a: FormalSeries, k: int) -> FormalSeries:
    if k < 0:
        raise ValueError("negative series powers are not defined")
    result = constant_series(a.basis, 1)
    for _ in range(k):
        result = series_mul(result, a)
    return result


def differentiate_s(a: FormalSeries, k: int = 1) -> FormalSeries:
    """Termwise d^k/ds^k: coefficients pick up the exact factor (-lambda)^k."""
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    if k == 0:
        return a
    accum = {}
    for e, p in a.terms:
        factor = Coefficient.from_exponent(-e) ** k
        accum[e] = p.scale(factor)
    return _build(a.basis, accum, a.truncation)


def shift_s(a: FormalSeries, h: RationalLike) -> FormalSeries:
    """Substitute s -> s + h; coefficients pick up the multiplier e^(-h*lambda)."""
    h = _as_fraction(h)
    if h == 0:
        return a
    accum = {}
    for e, p in a.terms:
        accum[e] = p.scale(Coefficient.damping(e * h))
    return _build(a.basis, accum, a.truncation)


def x_log_derivative(a: FormalSeries) -> FormalSeries:
    """Apply x*d/dx termwise (acts on the XPoly part only)."""
    accum = {e: p.x_log_derivative() for e, p in a.terms}
    return _build(a.basis, accum, a.truncation)


def leading_term(a: FormalSeries):
    """The least-exponent stored term, or ``None`` for a zero series.

    ``None`` means "zero up to the truncation bound"; consult
    ``a.truncation`` for the bound itself (``None`` = exactly zero).
    """
    return a.terms[0] if a.terms else None


def truncate(a: FormalSeries, new_bound: Exponent) -> FormalSeries:
    """Restrict the series to exponents <= ``new_bound``."""
    if a.truncation is not None and a.basis.compare(new_bound, a.truncation) > 0:
        raise BadBound(
            f"cannot extend validity: requested ({new_bound}) exceeds known ({a.truncation})")
    kept = tuple((e, p) for e, p in a.terms if a.basis.compare(e, new_bound) <= 0)
    return FormalSeries(a.basis, kept, new_bound)


def prefix(a: FormalSeries, count: int) -> FormalSeries:
    """The sub-series of the first ``count`` stored terms, truncated there."""
    if count <= 0:
        raise ValueError("prefix length must be positive")
    kept = a.terms[:count]
    if not kept:
        return a
    return FormalSeries(a.basis, kept, kept[-1][0])
