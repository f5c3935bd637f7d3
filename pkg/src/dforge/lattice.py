"""Integer-linear structure of exponent systems.

Exponents are rational vectors over the symbol basis (plus the constant
coordinate).  Clearing denominators turns a finite family into an integer
matrix whose row lattice is computed in Hermite normal form; the resulting
generators witness minimal rank and support exact membership tests.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import FactorLimitExceeded, NotInLatticeError, PrecisionTieWarning
from .linalg import rational_rank
from .series import (
    Coefficient,
    Exponent,
    FormalSeries,
    SymbolBasis,
)

# The constant coordinate participates in the lattice as a virtual column.
_CONST_COL = None


def _columns(basis: SymbolBasis) -> tuple:
    return (_CONST_COL, *basis.symbols)


def _exponent_row(e: Exponent, columns) -> list[Fraction]:
    return [e.const if c is _CONST_COL else e.coord(c) for c in columns]


def _row_to_exponent(row: Sequence[Fraction], columns) -> Exponent:
    coords = {}
    const = Fraction(0)
    for c, v in zip(columns, row):
        if c is _CONST_COL:
            const = v
        else:
            coords[c] = v
    return Exponent.make(coords, const)


def hermite_normal_form(matrix: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style HNF: echelon, positive pivots, entries above reduced mod pivot."""
    m = [list(map(int, row)) for row in matrix]
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    r = 0
    for c in range(ncols):
        while True:
            nz = [i for i in range(r, nrows) if m[i][c] != 0]
            if len(nz) <= 1:
                break
            i0 = min(nz, key=lambda i: abs(m[i][c]))
            for i in nz:
                if i == i0:
                    continue
                q = m[i][c] // m[i0][c]
                if q:
                    m[i] = [a - q * b for a, b in zip(m[i], m[i0])]
        nz = [i for i in range(r, nrows) if m[i][c] != 0]
        if not nz:
            continue
        m[r], m[nz[0]] = m[nz[0]], m[r]
        if m[r][c] < 0:
            m[r] = [-a for a in m[r]]
        for i in range(r):
            q = m[i][c] // m[r][c]
            if q:
                m[i] = [a - q * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == nrows:
            break
    return m[:r]


def _solve_over_echelon(vec: Sequence[Fraction],
                        rows: Sequence[Sequence[Fraction]]) -> Optional[list[int]]:
    """Integer coefficients c with vec = sum c_i rows_i, or None."""
    v = list(vec)
    coeffs = []
    for row in rows:
        pc = next((j for j, x in enumerate(row) if x != 0), None)
        if pc is None:
            coeffs.append(0)
            continue
        q = v[pc] / row[pc]
        if q.denominator != 1:
            return None
        q = int(q)
        coeffs.append(q)
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    if any(v):
        return None
    return coeffs


@dataclass(frozen=True)
class LatticeBasis:
    """Minimal integer generating set for a family of exponents.

    ``change_of_basis`` expresses every input over the generators exactly;
    ``input_subset`` lists indices of original exponents generating the same
    lattice, when such a subset exists within the scanned family.
    """

    basis: SymbolBasis
    generators: tuple[Exponent, ...]
    change_of_basis: tuple[tuple[int, ...], ...]
    rank: int
    input_subset: Optional[tuple[int, ...]] = None

    def generator_rows(self) -> list[list[Fraction]]:
        cols = _columns(self.basis)
        return [_exponent_row(g, cols) for g in self.generators]


def integer_basis(exponents: Sequence[Exponent], basis: SymbolBasis) -> LatticeBasis:
    """Hermite-normal-form lattice basis of the given exponents.

    Generators are returned in the symbol space with positive numeric
    values; empty input gives rank 0.
    """
    exponents = list(exponents)
    cols = _columns(basis)
    for e in exponents:
        basis.validate_exponent(e)
    if not exponents:
        return LatticeBasis(basis, (), (), 0, ())
    rows = [_exponent_row(e, cols) for e in exponents]
    denom_lcm = 1
    for row in rows:
        for v in row:
            denom_lcm = denom_lcm * v.denominator // math.gcd(denom_lcm, v.denominator)
    int_rows = [[int(v * denom_lcm) for v in row] for row in rows]
    hnf_rows = hermite_normal_form(int_rows)
    gen_rows = [[Fraction(v, denom_lcm) for v in row] for row in hnf_rows]
    generators = []
    for row in gen_rows:
        g = _row_to_exponent(row, cols)
        val = basis.exponent_value(g)
        if val < 0:
            g = -g
            row[:] = [-v for v in row]
        elif val == 0 and not g.is_zero:
            warnings.warn(
                f"lattice generator ({g}) evaluates to zero; "
                "numeric independence of the basis is in doubt",
                PrecisionTieWarning, stacklevel=2)
        generators.append(g)
    change = []
    for e, row in zip(exponents, rows):
        sol = _solve_over_echelon(row, gen_rows)
        if sol is None:
            raise AssertionError("input exponent not expressible over its own HNF basis")
        change.append(tuple(sol))
    subset = _same_lattice_subset(rows, gen_rows)
    return LatticeBasis(basis, tuple(generators), tuple(change),
                        len(generators), subset)


def _same_lattice_subset(rows, gen_rows) -> Optional[tuple[int, ...]]:
    """Indices of a rank-sized input subset generating the same lattice."""
    picked: list[int] = []
    picked_rows: list = []
    target = len(gen_rows)
    for i, row in enumerate(rows):
        if len(picked) == target:
            break
        if rational_rank(picked_rows + [row]) > len(picked):
            picked.append(i)
            picked_rows.append(row)
    if len(picked) < target:
        return None
    denom_lcm = 1
    for row in picked_rows:
        for v in row:
            denom_lcm = denom_lcm * v.denominator // math.gcd(denom_lcm, v.denominator)
    sub_hnf = hermite_normal_form([[int(v * denom_lcm) for v in row] for row in picked_rows])
    sub_rows = [[Fraction(v, denom_lcm) for v in row] for row in sub_hnf]
    for grow in gen_rows:
        if _solve_over_echelon(grow, sub_rows) is None:
            return None
    return tuple(picked)


def express(e: Exponent, B: LatticeBasis) -> Optional[tuple[int, ...]]:
    """Exact integer coordinates of ``e`` over the generators, or None."""
    cols = _columns(B.basis)
    for n, _ in e.coords:
        if n not in B.basis.symbols:
            return None
    vec = _exponent_row(e, cols)
    sol = _solve_over_echelon(vec, B.generator_rows())
    return None if sol is None else tuple(sol)


def reconstruct(B: LatticeBasis, coeffs: Sequence[int]) -> Exponent:
    """Exact sum of generators with the given integer coefficients."""
    total = Exponent.zero()
    for c, g in zip(coeffs, B.generators):
        if c:
            total = total + g * c
    return total


class RankScan:
    """Incremental lattice-rank tracker over a stream of exponents."""

    def __init__(self, basis: SymbolBasis):
        self.basis = basis
        self.cols = _columns(basis)
        self.rows: list[list[Fraction]] = []
        self.exponents: list[Exponent] = []
        self.rank = 0
        self.history: list[tuple[int, int]] = []  # (count scanned, rank)

    def add(self, e: Exponent) -> int:
        self.basis.validate_exponent(e)
        self.exponents.append(e)
        self.rows.append(_exponent_row(e, self.cols))
        new_rank = rational_rank(self.rows)
        if new_rank != self.rank:
            self.rank = new_rank
            self.history.append((len(self.exponents), new_rank))
        return self.rank

    def finish(self) -> LatticeBasis:
        return integer_basis(self.exponents, self.basis)


# ---------------------------------------------------------------------------
# Prime support of number-theoretic index streams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrimeSupport:
    """Primes dividing any examined index, plus indices that resisted factoring."""

    primes: tuple[int, ...]
    sample_size: int
    unfactored: tuple[int, ...] = ()


DEFAULT_FACTOR_LIMIT = 10 ** 6


def factorize(n: int, limit: int = DEFAULT_FACTOR_LIMIT) -> tuple[dict[int, int], Optional[int]]:
    """Trial division up to ``limit``; returns (factors, unfactored residue)."""
    if n < 1:
        raise ValueError("indices must be positive integers")
    factors: dict[int, int] = {}
    rest = n
    d = 2
    while d <= limit and d * d <= rest:
        while rest % d == 0:
            factors[d] = factors.get(d, 0) + 1
            rest //= d
        d += 1 if d == 2 else 2
    if rest > 1:
        if rest <= limit * limit:
            # every factor <= sqrt(rest) <= limit has been removed, so rest is prime
            factors[rest] = factors.get(rest, 0) + 1
        else:
            return factors, rest
    return factors, None


def prime_support(indices: Iterable[int], limit: int = DEFAULT_FACTOR_LIMIT,
                  strict: bool = False) -> PrimeSupport:
    """Union of prime factors over the index stream.

    Indices whose residue exceeds the certification range are reported in
    ``unfactored``; with ``strict=True`` the first such index raises
    :class:`FactorLimitExceeded` instead.
    """
    primes: set[int] = set()
    unfactored: list[int] = []
    count = 0
    for n in indices:
        count += 1
        factors, residue = factorize(n, limit)
        primes.update(factors)
        if residue is not None:
            if strict:
                raise FactorLimitExceeded(n)
            unfactored.append(n)
    return PrimeSupport(tuple(sorted(primes)), count, tuple(unfactored))


def primes_up_to(n: int) -> list[int]:
    """Plain sieve of Eratosthenes."""
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, int(math.isqrt(n)) + 1):
        if sieve[p]:
            sieve[p * p:: p] = bytearray(len(sieve[p * p:: p]))
    return [i for i, flag in enumerate(sieve) if flag]


def log_basis_for_indices(indices: Iterable[int], precision: int,
                          limit: int = DEFAULT_FACTOR_LIMIT) -> tuple[SymbolBasis, dict[int, Exponent]]:
    """Prime-log symbol basis covering the given indices, with log n vectors.

    Symbols are named ``L<p>`` with numeric value log p; the exponent of the
    index n is then the exact integer vector of its factorization.
    """
    from .numeric import log_decimal_string

    index_list = sorted(set(indices))
    all_primes: set[int] = set()
    factored: dict[int, dict[int, int]] = {}
    for n in index_list:
        factors, residue = factorize(n, limit)
        if residue is not None:
            raise FactorLimitExceeded(n)
        factored[n] = factors
        all_primes.update(factors)
    prime_list = sorted(all_primes)
    basis = SymbolBasis.from_pairs(
        [(f"L{p}", log_decimal_string(p, precision)) for p in prime_list],
        precision=precision)
    exponents = {
        n: Exponent.make({f"L{p}": k for p, k in factored[n].items()})
        for n in index_list
    }
    return basis, exponents


# ---------------------------------------------------------------------------
# Rewriting over lattice generators; gap statistics
# ---------------------------------------------------------------------------

def omega_rewrite(phi: FormalSeries, B: LatticeBasis) -> dict[tuple[int, ...], Coefficient]:
    """Rewrite a univariate series as a multi-index (Laurent) power series.

    Key (n_1..n_alpha) stands for the product of e^(-omega_i s) powers with
    sum n_i*omega_i equal to the term's exponent.
    """
    out: dict[tuple[int, ...], Coefficient] = {}
    for e, p in phi.terms:
        if p.degree not in (0, None):
            raise ValueError("omega rewriting expects a univariate series (x-degree 0)")
        vec = express(e, B)
        if vec is None:
            raise NotInLatticeError(e)
        c = p.constant()
        out[vec] = out.get(vec, Coefficient.zero()) + c
    return {k: v for k, v in out.items() if not v.is_zero}


@dataclass(frozen=True)
class GapRatios:
    """Consecutive exponent ratios with a running maximum envelope."""

    ratios: tuple
    exact: tuple  # Fraction where the ratio is exact, else None
    envelope: tuple
    dropped_prefix: int


def gap_ratios(exponents: Sequence[Exponent], basis: SymbolBasis) -> GapRatios:
    """Ratios lambda_i / lambda_{i-1} over the positive tail of the family."""
    values = [basis.exponent_value(e) for e in exponents]
    start = 0
    while start < len(values) and values[start] <= 0:
        start += 1
    tail = exponents[start:]
    tail_values = values[start:]
    ratios = []
    exact = []
    envelope = []
    best = None
    from .numeric import workprec
    for i in range(1, len(tail)):
        prev, cur = tail[i - 1], tail[i]
        q = _exact_ratio(cur, prev)
        with workprec(basis.precision):
            num = tail_values[i] / tail_values[i - 1]
        ratios.append(num)
        exact.append(q)
        best = num if best is None else max(best, num)
        envelope.append(best)
    return GapRatios(tuple(ratios), tuple(exact), tuple(envelope), start)


def _exact_ratio(a: Exponent, b: Exponent) -> Optional[Fraction]:
    """q with a == q*b when the two vectors are exactly proportional."""
    if b.is_zero:
        return None
    if b.const != 0:
        q = a.const / b.const
    else:
        if a.const != 0:
            return None
        name, val = b.coords[0]
        q = a.coord(name) / val
    return q if a == b * q else None
