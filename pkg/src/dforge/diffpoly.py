"""Difference-differential polynomials and resultant elimination.

A :class:`DiffPolynomial` is a sparse polynomial in the indeterminates
``f^(nu)(s + h)`` (derivative order nu, exact rational shift h) and an
optional explicit variable ``x``, with :class:`~dforge.series.Coefficient`
coefficients.  Elimination of the explicit variable goes through the
Sylvester resultant of F and its total derivative.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from .errors import DegenerateInput, ResultantVanished
from .linalg import Ring, determinant
from .series import Coefficient, XPoly, _as_coefficient, _as_fraction


@dataclass(frozen=True, order=True)
class DiffIndeterminate:
    """One argument slot f^(order)(s + shift); ordered by (shift, order)."""

    shift: Fraction
    order: int

    @staticmethod
    def make(order: int = 0, shift=0) -> "DiffIndeterminate":
        if order < 0:
            raise ValueError("derivative order must be non-negative")
        return DiffIndeterminate(_as_fraction(shift), order)

    def derived(self) -> "DiffIndeterminate":
        return DiffIndeterminate(self.shift, self.order + 1)

    def __str__(self) -> str:
        quotes = "'" * self.order
        if self.shift == 0:
            return f"f{quotes}"
        sign = "+" if self.shift > 0 else "-"
        return f"f{quotes}(s{sign}{abs(self.shift)})"


# Monomial: (x-degree, sorted tuple of (indeterminate, positive power)).
DPMonomial = tuple[int, tuple[tuple[DiffIndeterminate, int], ...]]

_UNIT: DPMonomial = (0, ())


def _dpm_mul(a: DPMonomial, b: DPMonomial) -> DPMonomial:
    xa, pa = a
    xb, pb = b
    powers = dict(pa)
    for ind, k in pb:
        powers[ind] = powers.get(ind, 0) + k
    return (xa + xb, tuple(sorted((i, k) for i, k in powers.items() if k != 0)))


def _dpm_f_degree(m: DPMonomial) -> int:
    return sum(k for _, k in m[1])


@dataclass(frozen=True)
class DiffPolynomial:
    """Sparse difference-differential polynomial with exact coefficients."""

    terms: tuple[tuple[DPMonomial, Coefficient], ...] = ()

    @staticmethod
    def _from_dict(d: dict) -> "DiffPolynomial":
        return DiffPolynomial(tuple(sorted(
            ((m, c) for m, c in d.items() if not c.is_zero),
            key=lambda t: t[0])))

    @staticmethod
    def zero() -> "DiffPolynomial":
        return DiffPolynomial()

    @staticmethod
    def from_coefficient(c) -> "DiffPolynomial":
        c = _as_coefficient(c)
        if c.is_zero:
            return DiffPolynomial()
        return DiffPolynomial(((_UNIT, c),))

    @staticmethod
    def one() -> "DiffPolynomial":
        return DiffPolynomial.from_coefficient(1)

    @staticmethod
    def from_indeterminate(ind: DiffIndeterminate, power: int = 1) -> "DiffPolynomial":
        if power == 0:
            return DiffPolynomial.one()
        return DiffPolynomial((((0, ((ind, power),)), Coefficient.one()),))

    @staticmethod
    def x_power(k: int) -> "DiffPolynomial":
        if k < 0:
            raise ValueError("x-degree must be non-negative")
        return DiffPolynomial((((k, ()), Coefficient.one()),))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def total_degree(self) -> int:
        """Total degree in the f-indeterminates (0 for f-free polynomials)."""
        return max((_dpm_f_degree(m) for m, _ in self.terms), default=0)

    @property
    def x_degree(self) -> int:
        return max((m[0] for m, _ in self.terms), default=0)

    def indeterminates(self) -> tuple[DiffIndeterminate, ...]:
        seen = set()
        for (_, powers), _ in self.terms:
            seen.update(ind for ind, _ in powers)
        return tuple(sorted(seen))

    def coefficient_symbols(self) -> set:
        out = set()
        for _, c in self.terms:
            out |= c.symbols()
        return out

    def has_shifts(self) -> bool:
        return any(ind.shift != 0 for ind in self.indeterminates())

    def has_damping(self) -> bool:
        return any(not damp.is_zero for _, c in self.terms for (_, damp), _ in c.terms)

    def __add__(self, other: "DiffPolynomial") -> "DiffPolynomial":
        d = dict(self.terms)
        for m, c in other.terms:
            d[m] = d.get(m, Coefficient.zero()) + c
        return DiffPolynomial._from_dict(d)

    def __neg__(self) -> "DiffPolynomial":
        return DiffPolynomial(tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other: "DiffPolynomial") -> "DiffPolynomial":
        return self + (-other)

    def __mul__(self, other: "DiffPolynomial") -> "DiffPolynomial":
        d: dict = {}
        for ma, ca in self.terms:
            for mb, cb in other.terms:
                m = _dpm_mul(ma, mb)
                prod = ca * cb
                if m in d:
                    d[m] = d[m] + prod
                else:
                    d[m] = prod
        return DiffPolynomial._from_dict(d)

    def scale(self, c) -> "DiffPolynomial":
        c = _as_coefficient(c)
        d = {m: v * c for m, v in self.terms}
        return DiffPolynomial._from_dict(d)

    def __pow__(self, k: int) -> "DiffPolynomial":
        if k < 0:
            raise ValueError("negative powers are not defined")
        out = DiffPolynomial.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __str__(self) -> str:
        from .grammar import pretty
        return pretty(self)


_DP_RING = Ring(zero=DiffPolynomial.zero(), one=DiffPolynomial.one(),
                add=lambda a, b: a + b, neg=lambda a: -a,
                mul=lambda a, b: a * b, is_zero=lambda a: a.is_zero)


def partial_wrt(F: DiffPolynomial, z: DiffIndeterminate) -> DiffPolynomial:
    """Formal partial derivative with respect to one indeterminate."""
    d: dict = {}
    for (xdeg, powers), c in F.terms:
        for idx, (ind, k) in enumerate(powers):
            if ind != z:
                continue
            if k == 1:
                rest = powers[:idx] + powers[idx + 1:]
            else:
                rest = powers[:idx] + ((ind, k - 1),) + powers[idx + 1:]
            m = (xdeg, rest)
            contrib = c.scale(k)
            d[m] = d.get(m, Coefficient.zero()) + contrib
    return DiffPolynomial._from_dict(d)


def _total_derivative(F: DiffPolynomial, include_x: bool) -> DiffPolynomial:
    d: dict = {}

    def accumulate(m, c):
        if m in d:
            d[m] = d[m] + c
        else:
            d[m] = c

    for (xdeg, powers), c in F.terms:
        # chain rule over the indeterminates: f^(nu) contributes f^(nu+1)
        for idx, (ind, k) in enumerate(powers):
            if k == 1:
                rest = powers[:idx] + powers[idx + 1:]
            else:
                rest = powers[:idx] + ((ind, k - 1),) + powers[idx + 1:]
            bumped = dict(rest)
            up = ind.derived()
            bumped[up] = bumped.get(up, 0) + 1
            m = (xdeg, tuple(sorted(bumped.items())))
            accumulate(m, c.scale(k))
        if include_x and xdeg > 0:
            accumulate((xdeg - 1, powers), c.scale(xdeg))
    return DiffPolynomial._from_dict(d)


def total_derivative_s(F: DiffPolynomial) -> DiffPolynomial:
    """d/ds; basis symbols and damping factors are constants, x is independent."""
    return _total_derivative(F, include_x=False)


def total_derivative_x(F: DiffPolynomial) -> DiffPolynomial:
    """d/dx when x is the independent variable the f's depend on."""
    return _total_derivative(F, include_x=True)


def x_coefficients(F: DiffPolynomial) -> list[DiffPolynomial]:
    """Coefficients of F viewed as univariate in x, ascending degree."""
    n = F.x_degree
    out = [dict() for _ in range(n + 1)]
    for (xdeg, powers), c in F.terms:
        m = (0, powers)
        out[xdeg][m] = out[xdeg].get(m, Coefficient.zero()) + c
    return [DiffPolynomial._from_dict(d) for d in out]


def sylvester_matrix(A: DiffPolynomial, B: DiffPolynomial) -> list[list[DiffPolynomial]]:
    """Sylvester matrix in x with the deg(B) rows of A's coefficients first.

    Sign convention: the resultant is the determinant of this matrix, so
    Res_x(x - a, x - b) = a - b.
    """
    ca = x_coefficients(A)
    cb = x_coefficients(B)
    da, db = len(ca) - 1, len(cb) - 1
    n = da + db
    zero = DiffPolynomial.zero()
    rows = []
    desc_a = list(reversed(ca))
    desc_b = list(reversed(cb))
    for i in range(db):
        rows.append([zero] * i + desc_a + [zero] * (n - i - len(desc_a)))
    for i in range(da):
        rows.append([zero] * i + desc_b + [zero] * (n - i - len(desc_b)))
    return rows


def sylvester_resultant(A: DiffPolynomial, B: DiffPolynomial) -> DiffPolynomial:
    """Res_x(A, B): zero iff A and B share a root over the fraction field."""
    da, db = A.x_degree, B.x_degree
    if da == 0 and db == 0:
        raise DegenerateInput("both inputs are constant in x")
    if A.is_zero or B.is_zero:
        raise DegenerateInput("resultant of the zero polynomial is degenerate")
    return determinant(sylvester_matrix(A, B), _DP_RING)


def split_x_monomial_content(F: DiffPolynomial) -> tuple[int, DiffPolynomial]:
    """Factor out the largest power of x dividing every monomial."""
    if F.is_zero:
        return 0, F
    m = min(xdeg for (xdeg, _), _ in F.terms)
    if m == 0:
        return 0, F
    shifted = {( (xdeg - m, powers)): c for (xdeg, powers), c in F.terms}
    return m, DiffPolynomial._from_dict(shifted)


def eliminate_x(F: DiffPolynomial) -> DiffPolynomial:
    """Remove the explicit x by the resultant with the total x-derivative.

    Every function solving F = 0 also solves the returned polynomial, via
    the Sylvester identity Res = M1*F + M2*F'.  Raises
    :class:`ResultantVanished` when F and dF/dx share a factor (reducible
    input); splitting off monomial x-content first often resolves that.
    """
    if F.is_zero:
        raise DegenerateInput("cannot eliminate x from the zero polynomial")
    if F.x_degree == 0:
        return F
    Fstar = total_derivative_x(F)
    result = sylvester_resultant(F, Fstar)
    if result.is_zero:
        raise ResultantVanished(
            "Res_x(F, dF/dx) = 0: F has a repeated or x-content factor; "
            "split the input (e.g. drop monomial x-content) and retry")
    if result.x_degree != 0:
        raise AssertionError("resultant unexpectedly kept explicit x")
    return result


# ---------------------------------------------------------------------------
# Evaluation on concrete polynomial solutions (used by elimination checks)
# ---------------------------------------------------------------------------

def xpoly_derivative(p: XPoly) -> XPoly:
    d = {}
    for k, c in p.coeffs:
        if k >= 1:
            d[k - 1] = d.get(k - 1, Coefficient.zero()) + c.scale(k)
    return XPoly._from_dict(d)


def xpoly_shift(p: XPoly, h: Fraction) -> XPoly:
    """Substitute x -> x + h by binomial expansion."""
    if h == 0:
        return p
    from math import comb
    d: dict = {}
    for k, c in p.coeffs:
        for j in range(k + 1):
            w = c.scale(Fraction(comb(k, j)) * h ** (k - j))
            d[j] = d.get(j, Coefficient.zero()) + w
    return XPoly._from_dict(d)


def evaluate_on_xpolynomial(F: DiffPolynomial, phi: XPoly) -> XPoly:
    """Substitute the concrete polynomial phi(x) for f, x staying explicit."""
    cache: dict[DiffIndeterminate, XPoly] = {}

    def value(ind: DiffIndeterminate) -> XPoly:
        if ind not in cache:
            p = phi
            for _ in range(ind.order):
                p = xpoly_derivative(p)
            cache[ind] = xpoly_shift(p, ind.shift)
        return cache[ind]

    total = XPoly.zero()
    for (xdeg, powers), c in F.terms:
        part = XPoly.monomial(xdeg, c)
        for ind, k in powers:
            v = value(ind)
            for _ in range(k):
                part = part * v
        total = total + part
    return total
