"""Exact arithmetic in the real number field Q(theta).

Elements are stored as integer coordinate vectors over the power basis
1, theta, ..., theta^(d-1) with a single positive denominator.  The minimal
polynomial is monic with integer coefficients, so products reduce back to the
power basis without leaving the integers.  Signs (hence comparisons) are
certified: a fast double-precision estimate is escalated to 80-digit
evaluation and finally to an exact zero test, so orbit combinatorics computed
through these elements never depend on rounding.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import mpmath
import numpy as np

_LD = np.longdouble
_INT64_SAFE = 1 << 62

_MP_DPS = 80
# |approx| above this threshold is trusted at double precision; below it we
# re-evaluate with mpmath before concluding anything about the sign.
_FAST_SIGN_MARGIN = 1e-10
_MP_SIGN_MARGIN = mpmath.mpf("1e-60")


class NumberField:
    """Q(theta) for the designated real root theta of an irreducible monic
    integer polynomial."""

    def __init__(self, minpoly_desc: list[int], approx_root):
        if minpoly_desc[0] != 1:
            raise ValueError("minimal polynomial must be monic")
        self.minpoly = tuple(int(c) for c in minpoly_desc)
        self.degree = len(minpoly_desc) - 1
        d = self.degree
        # theta^d = -(c_{d-1} theta^{d-1} + ... + c_0); ascending order here.
        asc = list(reversed(self.minpoly))
        top = [-asc[i] for i in range(d)]
        # Integer coordinates of theta^d ... theta^(2d-2) over the power basis.
        table = [tuple(top)]
        for _ in range(d - 2):
            prev = table[-1]
            shifted = [0] + list(prev[: d - 1])
            carry = prev[d - 1]
            row = [shifted[i] + carry * top[i] for i in range(d)]
            table.append(tuple(row))
        self._red_table = tuple(table)
        with mpmath.workdps(_MP_DPS):
            root = mpmath.mpf(approx_root)
            # Newton-polish the designated root to full working precision.
            coeffs = [mpmath.mpf(c) for c in self.minpoly]
            dcoeffs = [c * (d - i) for i, c in enumerate(coeffs[:-1])]
            for _ in range(200):
                num = mpmath.polyval(coeffs, root)
                den = mpmath.polyval(dcoeffs, root)
                step = num / den
                root = root - step
                if mpmath.fabs(step) < mpmath.mpf("1e-70"):
                    break
            self.root_mp = root
        self.root_float = float(self.root_mp)
        self._float_powers = tuple(self.root_float ** i for i in range(d))
        root_ld = _LD(mpmath.nstr(self.root_mp, 30))
        self._ld_powers = tuple(root_ld ** i for i in range(d))
        with mpmath.workdps(_MP_DPS):
            self._mp_powers = tuple(self.root_mp ** i for i in range(d))
        self._root_cache: dict[int, mpmath.mpf] = {_MP_DPS: self.root_mp}
        self.zero = FieldElement(self, (0,) * d, 1)
        self.one = FieldElement(self, (1,) + (0,) * (d - 1), 1)
        if d > 1:
            self.gen = FieldElement(self, (0, 1) + (0,) * (d - 2), 1)
        else:
            # Degree 1: theta is the rational root itself.
            self.gen = FieldElement(self, (-self.minpoly[1],), 1)
        self._gen_pows: dict[int, FieldElement] = {0: self.one}

    def __repr__(self):
        return f"NumberField(minpoly={list(self.minpoly)}, root~{self.root_float:.6f})"

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.minpoly == other.minpoly

    def __hash__(self):
        return hash(self.minpoly)

    def root_at(self, dps: int):
        """The designated root Newton-polished to dps digits (cached)."""
        key = max(_MP_DPS, ((dps + 63) // 64) * 64)
        if key not in self._root_cache:
            with mpmath.workdps(key + 20):
                root = mpmath.mpf(self.root_mp)
                coeffs = [mpmath.mpf(c) for c in self.minpoly]
                d = self.degree
                dcoeffs = [c * (d - i) for i, c in enumerate(coeffs[:-1])]
                for _ in range(400):
                    step = mpmath.polyval(coeffs, root) / mpmath.polyval(dcoeffs, root)
                    root = root - step
                    if mpmath.fabs(step) < mpmath.mpf(10) ** (-key - 10):
                        break
                self._root_cache[key] = root
        return self._root_cache[key]

    def element(self, coeffs) -> "FieldElement":
        """Element from rational coordinates over the power basis."""
        d = self.degree
        fracs = [Fraction(c) for c in coeffs]
        if len(fracs) < d:
            fracs += [Fraction(0)] * (d - len(fracs))
        den = 1
        for f in fracs:
            den = den * f.denominator // gcd(den, f.denominator)
        nums = tuple(int(f * den) for f in fracs)
        return FieldElement(self, nums, den)

    def from_rational(self, q) -> "FieldElement":
        q = Fraction(q)
        d = self.degree
        return FieldElement(self, (q.numerator,) + (0,) * (d - 1), q.denominator)

    def gen_power(self, k: int) -> "FieldElement":
        """theta^k for any integer k (negative powers via field inversion)."""
        if k in self._gen_pows:
            return self._gen_pows[k]
        if k > 0:
            v = self.gen_power(k - 1) * self.gen
        else:
            v = self.gen_power(k + 1) * self.gen.inverse()
        self._gen_pows[k] = v
        return v

    def reduce_int_poly(self, conv: list[int]) -> tuple[int, ...]:
        """Reduce integer coefficients of degree <= 2d-2 to the power basis."""
        d = self.degree
        out = list(conv[:d]) + [0] * max(0, d - len(conv))
        for k in range(d, len(conv)):
            c = conv[k]
            if c:
                row = self._red_table[k - d]
                for i in range(d):
                    out[i] += c * row[i]
        return tuple(out)


def _normalize(nums: tuple[int, ...], den: int):
    if den < 0:
        nums = tuple(-n for n in nums)
        den = -den
    g = den
    for n in nums:
        g = gcd(g, n)
        if g == 1:
            break
    if g > 1:
        nums = tuple(n // g for n in nums)
        den //= g
    return nums, den


class FieldElement:
    """One element of a NumberField; immutable, hashable, totally ordered
    through the real embedding."""

    __slots__ = ("field", "nums", "den", "_float")

    def __init__(self, field: NumberField, nums: tuple[int, ...], den: int):
        nums, den = _normalize(nums, den)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "nums", nums)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "_float", None)

    def __setattr__(self, *a):
        raise AttributeError("FieldElement is immutable")

    # -- conversions ------------------------------------------------------

    def __float__(self) -> float:
        """Extended-precision evaluation: the power-basis sum can cancel by
        several digits, so a double Horner is not accurate enough for the
        trigonometric arguments downstream."""
        v = self._float
        if v is None:
            if self.den < _INT64_SAFE and all(abs(n) < _INT64_SAFE for n in self.nums):
                pw = self.field._ld_powers
                acc = _LD(0)
                for n, p in zip(self.nums, pw):
                    if n:
                        acc = acc + _LD(n) * p
                v = float(acc / _LD(self.den))
            else:
                v = float(self.to_mpf())
            object.__setattr__(self, "_float", v)
        return v

    def _required_dps(self) -> int:
        # Enough digits that a nonzero element cannot be mistaken for zero:
        # |z| >= 1/(den * A^(d-1) * const) by the norm bound, so 4x the
        # coordinate digit count plus slack certifies the sign.
        bits = max(
            max((abs(n).bit_length() for n in self.nums), default=1),
            self.den.bit_length(),
        )
        return max(_MP_DPS, 4 * (bits // 3 + 1) + 40)

    def to_mpf(self, dps: int | None = None):
        dps = dps or self._required_dps()
        root = self.field.root_at(dps)
        with mpmath.workdps(dps):
            acc = mpmath.mpf(0)
            # Horner keeps the evaluation stable at any precision.
            for n in reversed(self.nums):
                acc = acc * root + n
            return acc / self.den

    def __repr__(self):
        return f"FieldElement({list(self.nums)}/{self.den} ~ {float(self):.12g})"

    # -- ring operations --------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self, other
        if a.den == b.den:
            return FieldElement(a.field, tuple(x + y for x, y in zip(a.nums, b.nums)), a.den)
        g = gcd(a.den, b.den)
        da = b.den // g
        db = a.den // g
        return FieldElement(
            a.field,
            tuple(x * da + y * db for x, y in zip(a.nums, b.nums)),
            a.den * da,
        )

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-n for n in self.nums), self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return FieldElement(self.field, tuple(n * other for n in self.nums), self.den)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d = self.field.degree
        a, b = self.nums, other.nums
        conv = [0] * (2 * d - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        conv[i + j] += x * y
        nums = self.field.reduce_int_poly(conv)
        return FieldElement(self.field, nums, self.den * other.den)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = self.field.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, int):
            return FieldElement(self.field, self.nums, self.den * other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def inverse(self) -> "FieldElement":
        """Field inverse via the extended Euclidean algorithm against the
        minimal polynomial (rational arithmetic; not a hot-loop operation)."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero field element")
        f = self.field
        # self as ascending Fraction polynomial
        a = [Fraction(n, self.den) for n in self.nums]
        m = [Fraction(c) for c in reversed(f.minpoly)]
        # extended Euclid: find u with u*a = 1 mod minpoly
        r0, r1 = m, a
        s0, s1 = [Fraction(0)], [Fraction(1)]

        def deg(p):
            for i in range(len(p) - 1, -1, -1):
                if p[i] != 0:
                    return i
            return -1

        def sub_scaled(p, q, c, shift):
            out = list(p)
            while len(out) < len(q) + shift:
                out.append(Fraction(0))
            for i, qc in enumerate(q):
                out[i + shift] -= c * qc
            return out

        while deg(r1) > 0:
            while deg(r0) >= deg(r1) >= 1:
                d0, d1 = deg(r0), deg(r1)
                c = r0[d0] / r1[d1]
                r0 = sub_scaled(r0, r1, c, d0 - d1)
                s0 = sub_scaled(s0, s1, c, d0 - d1)
            r0, r1 = r1, r0
            s0, s1 = s1, s0
        if deg(r1) != 0:
            # gcd landed in r0 as a constant after the final swap
            r0, r1 = r1, r0
            s0, s1 = s1, s0
        c = r1[deg(r1)]
        inv_coeffs = [x / c for x in s1]
        return f.element(inv_coeffs[: f.degree])

    # -- comparisons ------------------------------------------------------

    def is_zero(self) -> bool:
        return all(n == 0 for n in self.nums)

    def sign(self) -> int:
        """Certified sign of the real embedding."""
        if self.is_zero():
            return 0
        bits = max(
            max(abs(n).bit_length() for n in self.nums),
            self.den.bit_length(),
        )
        if bits < 48:
            v = float(self)
            if abs(v) > _FAST_SIGN_MARGIN:
                return 1 if v > 0 else -1
        dps = self._required_dps()
        mv = self.to_mpf(dps)
        # At this precision the norm bound separates every nonzero element
        # from zero by far more than the evaluation error.
        if mv == 0 or mpmath.fabs(mv) < mpmath.mpf(10) ** (-(dps - 5)):
            raise AssertionError("sign determination failed; precision model violated")
        return 1 if mv > 0 else -1

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.field == other.field and self.nums == other.nums and self.den == other.den

    def __hash__(self):
        return hash((self.field.minpoly, self.nums, self.den))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            return other
        if isinstance(other, int):
            return self.field.from_rational(other)
        if isinstance(other, Fraction):
            return self.field.from_rational(other)
        return NotImplemented
