"""Exact integer-polynomial utilities.

Characteristic polynomials are computed over the integers (Faddeev-LeVerrier
with rational bookkeeping, result certified integral), factored over Z via
sympy, and roots are extracted with closed forms up to the reciprocal-quartic
case.  Higher degrees fall back to a polished iterative solver whose residual
is certified below 1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import sympy

# Working precision for root polishing.  53-bit doubles are derived from
# these; 80 digits leaves a wide margin over the 1e-12 certification target.
_MP_DPS = 80


def mat_mul(a: tuple, b: tuple) -> tuple:
    """Exact product of two square integer/rational matrices (tuples of rows)."""
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def mat_identity(n: int) -> tuple:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_trace(a: tuple):
    return sum(a[i][i] for i in range(len(a)))


def exact_determinant(rows: tuple) -> int:
    """Integer determinant by fraction-free Bareiss elimination."""
    n = len(rows)
    m = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def charpoly_int(rows: tuple) -> list[int]:
    """Characteristic polynomial of an integer matrix.

    Returns coefficients [1, c_{n-1}, ..., c_0] (descending powers, monic).
    Faddeev-LeVerrier recursion; the intermediate divisions are exact, which
    we enforce by running the recursion over Fractions and asserting
    integrality of the output.
    """
    n = len(rows)
    a = tuple(tuple(Fraction(x) for x in row) for row in rows)
    coeffs = [Fraction(1)]
    m = tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n))
    for k in range(1, n + 1):
        # M_k = A * M_{k-1} + c_{n-k+1} * I
        am = mat_mul(a, m)
        m = tuple(
            tuple(am[i][j] + (coeffs[-1] if i == j else 0) for j in range(n))
            for i in range(n)
        )
        c = -mat_trace(mat_mul(a, m)) / k
        coeffs.append(c)
    out = []
    for c in coeffs:
        if c.denominator != 1:
            raise AssertionError("Faddeev-LeVerrier produced a non-integer coefficient")
        out.append(int(c))
    return out


def poly_eval_matrix(coeffs_desc: list[int], rows: tuple) -> tuple:
    """Evaluate an integer polynomial at an integer matrix (Horner, exact)."""
    n = len(rows)
    acc = tuple(tuple(coeffs_desc[0] if i == j else 0 for j in range(n)) for i in range(n))
    for c in coeffs_desc[1:]:
        acc = mat_mul(acc, rows)
        acc = tuple(
            tuple(acc[i][j] + (c if i == j else 0) for j in range(n)) for i in range(n)
        )
    return acc


def factor_over_z(coeffs_desc: list[int]) -> list[tuple[list[int], int]]:
    """Factor a monic integer polynomial over Z.

    Returns [(factor_coeffs_desc, multiplicity), ...] with integer factors,
    sorted by (degree, coefficients) for determinism.
    """
    x = sympy.Symbol("x")
    poly = sympy.Poly(coeffs_desc, x, domain=sympy.ZZ)
    _, factors = poly.factor_list()
    out = []
    for f, mult in factors:
        fc = [int(c) for c in f.all_coeffs()]
        if fc[0] < 0:
            fc = [-c for c in fc]
        out.append((fc, int(mult)))
    out.sort(key=lambda t: (len(t[0]), t[0]))
    return out


@dataclass(frozen=True)
class AlgebraicRoot:
    """One root of an irreducible integer polynomial.

    value is an mpmath complex at _MP_DPS digits; minpoly holds the
    (descending, content-free, positive-leading) coefficients of the
    irreducible factor this root belongs to.
    """

    value: mpmath.mpc
    minpoly: tuple[int, ...]
    multiplicity: int

    @property
    def is_real(self) -> bool:
        return self.value.imag == 0

    @property
    def real(self) -> float:
        return float(self.value.real)

    def as_complex(self) -> complex:
        return complex(float(self.value.real), float(self.value.imag))

    @property
    def modulus(self) -> float:
        return float(mpmath.fabs(self.value))

    def modulus_mp(self):
        return mpmath.fabs(self.value)


def _mp_sqrt(x):
    return mpmath.sqrt(x)


def _roots_closed_form(coeffs: list[int]):
    """Closed-form roots for degree <= 2 and palindromic quartics.

    Returns a list of mpmath complex numbers, or None when no closed form is
    implemented for this shape.
    """
    deg = len(coeffs) - 1
    if deg == 1:
        a, b = coeffs
        return [mpmath.mpc(mpmath.mpf(-b) / a)]
    if deg == 2:
        a, b, c = (mpmath.mpf(v) for v in coeffs)
        disc = b * b - 4 * a * c
        sq = _mp_sqrt(disc) if disc >= 0 else mpmath.mpc(0, _mp_sqrt(-disc))
        return [(-b + sq) / (2 * a), (-b - sq) / (2 * a)]
    if deg == 4 and coeffs[0] == coeffs[4] and coeffs[1] == coeffs[3]:
        # Palindromic: substitute y = x + 1/x, solve the quadratic in y,
        # then unfold each y into the pair x = (y +- sqrt(y^2-4)) / 2.
        a, b, c = coeffs[0], coeffs[1], coeffs[2]
        ys = _roots_closed_form([a, b, c - 2 * a])
        roots = []
        for y in ys:
            disc = y * y - 4
            sq = mpmath.sqrt(mpmath.mpc(disc))
            roots.append((y + sq) / 2)
            roots.append((y - sq) / 2)
        return roots
    return None


def _roots_iterative(coeffs: list[int]):
    """Bracket-free polished root finding with residual certification."""
    with mpmath.workdps(_MP_DPS):
        rts = mpmath.polyroots([mpmath.mpf(c) for c in coeffs], maxsteps=200,
                               extraprec=200)
        # Certify: |p(r)| / |p'(r)| below 1e-12 for every root.
        dcoeffs = [c * (len(coeffs) - 1 - i) for i, c in enumerate(coeffs[:-1])]
        for r in rts:
            num = mpmath.polyval([mpmath.mpf(c) for c in coeffs], r)
            den = mpmath.polyval([mpmath.mpf(c) for c in dcoeffs], r)
            if den == 0 or mpmath.fabs(num / den) > mpmath.mpf("1e-12"):
                raise AssertionError("root certification failed")
        return [mpmath.mpc(r) for r in rts]


def roots_of_int_poly(coeffs_desc: list[int]) -> list[AlgebraicRoot]:
    """All roots of a monic integer polynomial, with minimal-polynomial tags.

    Roots are sorted by (-|root|, -Re, Im) so the dominant eigenvalue comes
    first and the output order is deterministic.
    """
    out = []
    with mpmath.workdps(_MP_DPS):
        for factor, mult in factor_over_z(coeffs_desc):
            vals = _roots_closed_form(factor)
            if vals is None:
                vals = _roots_iterative(factor)
            for v in vals:
                v = mpmath.mpc(v)
                if abs(v.imag) < mpmath.mpf("1e-60"):
                    v = mpmath.mpc(v.real, 0)
                out.append(AlgebraicRoot(value=v, minpoly=tuple(factor),
                                         multiplicity=mult))
    out.sort(key=lambda r: (-r.modulus, -r.real, float(r.value.imag)))
    return out


def is_primitive(rows: tuple) -> bool:
    """True if some power of the nonnegative integer matrix is positive."""
    n = len(rows)
    if any(x < 0 for row in rows for x in row):
        return False
    # Boolean reachability: primitive iff B^k > 0 for some k <= (n-1)^2 + 1.
    cur = rows
    limit = (n - 1) * (n - 1) + 1
    for _ in range(limit):
        if all(x > 0 for row in cur for x in row):
            return True
        cur = mat_mul(cur, rows)
        # Clamp to avoid huge integers; only positivity matters.
        cur = tuple(tuple(min(x, 1) for x in row) for row in cur)
    return False
