"""Exact linear algebra on induced cohomology actions.

Spectral data of the integer matrix acting on first cohomology: exact
characteristic polynomial, certified eigenvalue classification against the
unit circle, geometric multiplicities by exact rank over the splitting field,
invariant subspace bases with verified residuals, and the derived table of
deviation exponents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import NotUnimodular, TopEigenvalueNotSimple
from .exactpoly import (
    AlgebraicRoot,
    charpoly_int,
    exact_determinant,
    mat_mul,
    roots_of_int_poly,
)
from .numberfield import NumberField

# Moduli within this distance of 1 (at 80-digit precision) are classified as
# unit circle; integer matrices of the sizes handled here cannot have a
# nonzero gap this small.
_UNIT_CIRCLE_MARGIN = mpmath.mpf("1e-40")


@dataclass(frozen=True)
class IntegerMatrix:
    """Square integer matrix, immutable, with exact helpers."""

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.entries)
        if n == 0 or any(len(r) != n for r in self.entries):
            raise ValueError("matrix must be square and nonempty")
        if any(not isinstance(x, int) for r in self.entries for x in r):
            raise ValueError("entries must be integers")

    @classmethod
    def from_rows(cls, rows) -> "IntegerMatrix":
        return cls(tuple(tuple(int(x) for x in r) for r in rows))

    @classmethod
    def from_json(cls, text: str) -> "IntegerMatrix":
        return cls.from_rows(json.loads(text))

    @property
    def dim(self) -> int:
        return len(self.entries)

    def determinant(self) -> int:
        return exact_determinant(self.entries)

    def is_unimodular(self) -> bool:
        return abs(self.determinant()) == 1

    def transpose(self) -> "IntegerMatrix":
        n = self.dim
        return IntegerMatrix(tuple(tuple(self.entries[j][i] for j in range(n))
                                   for i in range(n)))

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        return IntegerMatrix(mat_mul(self.entries, other.entries))

    def apply(self, vec):
        return tuple(sum(r[j] * vec[j] for j in range(self.dim)) for r in self.entries)

    def to_numpy(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    def __str__(self):
        return "\n".join(" ".join(f"{x:4d}" for x in r) for r in self.entries)


def characteristic_polynomial(m: IntegerMatrix) -> list[int]:
    """Monic characteristic polynomial, descending integer coefficients."""
    return charpoly_int(m.entries)


@dataclass(frozen=True)
class EigenvalueRecord:
    value: complex
    modulus: float
    minpoly: tuple[int, ...]
    algebraic_multiplicity: int
    geometric_multiplicity: int
    largest_block: int
    location: str  # "expanding" | "contracting" | "neutral"

    def to_json(self) -> dict:
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "minpoly": list(self.minpoly),
            "algebraic_multiplicity": self.algebraic_multiplicity,
            "geometric_multiplicity": self.geometric_multiplicity,
            "location": self.location,
        }


@dataclass(frozen=True)
class SpectralSplit:
    """Spectral decomposition of a cohomology action.

    eigenvalues are sorted by decreasing modulus; subspace bases are real
    matrices whose columns span E+, E-, E0, verified to be invariant with the
    stated residual.
    """

    matrix: IntegerMatrix
    eigenvalues: tuple[EigenvalueRecord, ...]
    top: AlgebraicRoot
    h_top: float
    expanding: tuple[tuple[complex, int], ...]  # (eigenvalue, geometric mult)
    neutral_multiplicity: int
    E_plus: np.ndarray = field(repr=False)
    E_minus: np.ndarray = field(repr=False)
    E_zero: np.ndarray = field(repr=False)
    jordan_basis_plus: tuple = field(repr=False, default=())
    jordan_basis_minus: tuple = field(repr=False, default=())
    tol: float = 1e-9

    @property
    def lam(self) -> float:
        return self.top.real

    @property
    def dim(self) -> int:
        return self.matrix.dim

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "lambda": self.lam,
            "lambda_minpoly": list(self.top.minpoly),
            "h_top": self.h_top,
            "eigenvalues": [r.to_json() for r in self.eigenvalues],
            "neutral_multiplicity": self.neutral_multiplicity,
            "dim_E_plus": int(self.E_plus.shape[1]),
            "dim_E_minus": int(self.E_minus.shape[1]),
            "dim_E_zero": int(self.E_zero.shape[1]),
        }


def _field_for_root(root: AlgebraicRoot) -> NumberField:
    # The embedding is irrelevant for rank work; seed with the real part.
    approx = float(root.value.real) if root.value.real != 0 else 0.5
    return NumberField(list(root.minpoly), approx)


def _rank_over_field(rows, is_zero) -> int:
    """Row-echelon rank with exact zero tests; rows is a list of lists."""
    m = [list(r) for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    rank = 0
    col = 0
    while rank < nrows and col < ncols:
        pivot = None
        for i in range(rank, nrows):
            if not is_zero(m[i][col]):
                pivot = i
                break
        if pivot is None:
            col += 1
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        pv = m[rank][col]
        for i in range(rank + 1, nrows):
            if not is_zero(m[i][col]):
                c = m[i][col] / pv
                m[i] = [m[i][j] - c * m[rank][j] for j in range(ncols)]
        rank += 1
        col += 1
    return rank


def _jordan_data_exact(m: IntegerMatrix, root: AlgebraicRoot) -> tuple[int, int]:
    """(geometric multiplicity, largest Jordan block) of an algebraic
    eigenvalue, via exact ranks of powers of (m - mu I) over Q(mu)."""
    n = m.dim
    if root.multiplicity == 1:
        return 1, 1
    nf = _field_for_root(root)
    mu = nf.gen
    a = [[nf.from_rational(m.entries[i][j]) - (mu if i == j else nf.zero)
          for j in range(n)] for i in range(n)]
    is_zero = lambda e: e.is_zero()
    ranks = []
    power = a
    for _ in range(root.multiplicity):
        ranks.append(_rank_over_field(power, is_zero))
        power = [[sum((power[i][k] * a[k][j] for k in range(n)), nf.zero)
                  for j in range(n)] for i in range(n)]
    geom = n - ranks[0]
    largest = root.multiplicity
    prev = n
    for p, r in enumerate(ranks, start=1):
        if r == prev:
            largest = p - 1
            break
        prev = r
    return geom, max(largest, 1)


def _root_location(root: AlgebraicRoot) -> str:
    mod = root.modulus_mp()
    if mpmath.fabs(mod - 1) < _UNIT_CIRCLE_MARGIN:
        return "neutral"
    return "expanding" if mod > 1 else "contracting"


def _real_poly_from_roots(roots) -> np.ndarray:
    """Real monic polynomial with the given closed-under-conjugation roots."""
    with mpmath.workdps(60):
        coeffs = [mpmath.mpc(1)]
        for r in roots:
            nxt = [mpmath.mpc(0)] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                nxt[i] += c
                nxt[i + 1] -= c * r.value
            coeffs = nxt
        return np.array([float(c.real) for c in coeffs])


def _invariant_subspace(m_np: np.ndarray, ann_poly: np.ndarray, dim_expected: int) -> np.ndarray:
    """Orthonormal basis of ker(p(M)) via SVD, p the annihilating polynomial."""
    n = m_np.shape[0]
    acc = np.eye(n) * ann_poly[0]
    for c in ann_poly[1:]:
        acc = acc @ m_np + c * np.eye(n)
    _, s, vt = np.linalg.svd(acc)
    return vt[n - dim_expected:].T.copy() if dim_expected > 0 else np.zeros((n, 0))


def _jordan_chains(m_np: np.ndarray, records, side: str) -> tuple:
    """Real Jordan-basis vectors for the expanding (side='plus') or
    contracting (side='minus') part, grouped as (eigenvalue, [chain...]).

    Simple eigenvalues get their eigenvector; repeated ones get least-squares
    generalized chains.  Complex pairs contribute real/imaginary parts.
    """
    out = []
    want = "expanding" if side == "plus" else "contracting"
    for rec in records:
        if rec.location != want or rec.value.imag < 0:
            continue
        mu = rec.value
        a = m_np.astype(complex) - mu * np.eye(m_np.shape[0])
        _, s, vt = np.linalg.svd(a)
        kdim = int(np.sum(s < 1e-8 * max(1.0, s[0])))
        kdim = max(kdim, 1)
        kernel = vt[-kdim:].conj().T
        chains = []
        for c in range(kernel.shape[1]):
            chain = [kernel[:, c]]
            for _ in range(rec.largest_block - 1):
                nxt, *_ = np.linalg.lstsq(a, chain[-1], rcond=None)
                if np.linalg.norm(a @ nxt - chain[-1]) > 1e-6:
                    break
                chain.append(nxt)
            chains.append(tuple(chain))
        out.append((mu, tuple(chains)))
    return tuple(out)


def spectral_split(m: IntegerMatrix, tol: float = 1e-9) -> SpectralSplit:
    """Full spectral splitting of a unimodular cohomology action.

    Raises NotUnimodular when |det| != 1 and TopEigenvalueNotSimple when the
    dominant eigenvalue is not real, simple and strictly outside the unit
    circle.
    """
    if not m.is_unimodular():
        raise NotUnimodular(f"determinant {m.determinant()} is not +-1")
    n = m.dim
    cp = characteristic_polynomial(m)
    roots = roots_of_int_poly(cp)

    top = roots[0]
    if not top.is_real or top.real <= 1.0:
        raise TopEigenvalueNotSimple("dominant eigenvalue not real and > 1")
    if top.multiplicity != 1:
        raise TopEigenvalueNotSimple("dominant eigenvalue not simple")
    with mpmath.workdps(60):
        top_mod = top.modulus_mp()
        for other in roots[1:]:
            if other is top:
                continue
            if mpmath.fabs(other.modulus_mp() - top_mod) < _UNIT_CIRCLE_MARGIN:
                raise TopEigenvalueNotSimple("dominant modulus is not strictly dominant")

    records = []
    jordan_cache: dict[tuple, tuple[int, int]] = {}
    for r in roots:
        key = (r.minpoly, r.multiplicity)
        if key not in jordan_cache:
            jordan_cache[key] = _jordan_data_exact(m, r)
        geom, largest = jordan_cache[key]
        records.append(
            EigenvalueRecord(
                value=r.as_complex(),
                modulus=r.modulus,
                minpoly=r.minpoly,
                algebraic_multiplicity=r.multiplicity,
                geometric_multiplicity=geom,
                largest_block=largest,
                location=_root_location(r),
            )
        )

    expanding_roots = [r for r in roots if _root_location(r) == "expanding"]
    contracting_roots = [r for r in roots if _root_location(r) == "contracting"]
    neutral_roots = [r for r in roots if _root_location(r) == "neutral"]
    dim_plus = sum(r.multiplicity for r in expanding_roots)
    dim_minus = sum(r.multiplicity for r in contracting_roots)
    dim_zero = sum(r.multiplicity for r in neutral_roots)

    m_np = m.to_numpy()
    E_plus = _invariant_subspace(m_np, _real_poly_from_roots(expanding_roots), dim_plus)
    E_minus = _invariant_subspace(m_np, _real_poly_from_roots(contracting_roots), dim_minus)
    E_zero = _invariant_subspace(m_np, _real_poly_from_roots(neutral_roots), dim_zero)

    for basis in (E_plus, E_minus, E_zero):
        if basis.shape[1] == 0:
            continue
        restriction = np.linalg.lstsq(basis, m_np @ basis, rcond=None)[0]
        residual = np.linalg.norm(m_np @ basis - basis @ restriction)
        if residual > tol * max(1.0, np.linalg.norm(m_np)):
            raise AssertionError(f"subspace residual {residual:.3e} exceeds tol")

    neutral_mult = max((rec.geometric_multiplicity for rec in records
                        if rec.location == "neutral"), default=0)
    expanding = tuple(
        (rec.value, rec.geometric_multiplicity)
        for rec in records if rec.location == "expanding"
    )

    return SpectralSplit(
        matrix=m,
        eigenvalues=tuple(records),
        top=top,
        h_top=float(mpmath.log(top.value.real)),
        expanding=expanding,
        neutral_multiplicity=neutral_mult,
        E_plus=E_plus,
        E_minus=E_minus,
        E_zero=E_zero,
        jordan_basis_plus=_jordan_chains(m_np, records, "plus"),
        jordan_basis_minus=_jordan_chains(m_np, records, "minus"),
        tol=tol,
    )


@dataclass(frozen=True)
class ExponentRow:
    index: int
    nu: float
    jordan: int

    def to_json(self):
        return {"i": self.index, "nu": self.nu, "J": self.jordan}


@dataclass(frozen=True)
class ExponentTable:
    rows: tuple[ExponentRow, ...]

    def __post_init__(self):
        if not self.rows or self.rows[0].nu != 1.0:
            raise AssertionError("first deviation exponent must be exactly 1")
        for r in self.rows[1:]:
            if not (0.0 < r.nu < 1.0):
                raise AssertionError("secondary exponents must lie in (0, 1)")
        nus = [r.nu for r in self.rows]
        if nus != sorted(nus, reverse=True):
            raise AssertionError("rows must be sorted by decreasing exponent")

    @property
    def secondary(self) -> tuple[ExponentRow, ...]:
        return self.rows[1:]

    def to_json(self):
        return [r.to_json() for r in self.rows]


def deviation_exponents(s: SpectralSplit) -> ExponentTable:
    """Deviation exponents nu_i = log|mu_i| / h_top for the expanding part.

    Eigenvalues with equal modulus share one row (tie grouping by modulus);
    the row carries the largest geometric multiplicity within the group.
    """
    groups: list[list[tuple[complex, int]]] = []
    for mu, jmult in s.expanding:
        mod = abs(mu)
        for g in groups:
            if abs(abs(g[0][0]) - mod) < 1e-9:
                g.append((mu, jmult))
                break
        else:
            groups.append([(mu, jmult)])
    groups.sort(key=lambda g: -abs(g[0][0]))
    rows = []
    for i, g in enumerate(groups, start=1):
        if i == 1:
            nu = 1.0
        else:
            nu = float(np.log(abs(g[0][0])) / s.h_top)
        rows.append(ExponentRow(index=i, nu=nu, jordan=max(j for _, j in g)))
    return ExponentTable(rows=tuple(rows))
