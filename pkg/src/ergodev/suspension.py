"""Suspension flow of a pseudo-Anosov model and accelerated ergodic integrals.

The translation (unstable) flow moves vertically at unit speed through the
rectangles I_a x [0, h_a) and applies the interval exchange at each roof.
Observables are per-rectangle polynomial-times-trigonometric profiles with
closed-form integrals, so a full crossing of any renormalization tower has a
closed form too: depth-(k+1) tower integrals are built from depth-k ones by
replaying the Rauzy loop, which is what makes Birkhoff integrals over times
of order 10^7 cost O(log T) tower crossings instead of 10^7 flow steps.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import HitSingularity
from .iet import PseudoAnosovModel, _translations
from .numberfield import FieldElement

# Tower closed forms accumulate amplitudes of size lambda^depth; 80-bit
# extended precision keeps the level-to-level consistency below 1e-12
# through the depths a 1e7 time horizon needs.
_LD = np.longdouble
_CLD = np.clongdouble


def _ld_exact(fe: FieldElement) -> np.longdouble:
    """Extended-precision value of an exact field element (via 30 digits)."""
    return _LD(mpmath.nstr(fe.to_mpf(40), 30))

_MPF_PREC_BITS = 150  # fallback significand for non-algebraic start data


def _as_coord(model: PseudoAnosovModel, value):
    """Coerce a coordinate to FieldElement (kept) or high-precision mpf."""
    if isinstance(value, FieldElement):
        return value
    if isinstance(value, mpmath.mpf):
        return value
    from fractions import Fraction
    if isinstance(value, (int, Fraction)):
        return model.field.from_rational(value)
    return mpmath.mpf(value, prec=_MPF_PREC_BITS)


@dataclass(frozen=True)
class FlowPoint:
    """Point of the suspension: base coordinate x and height y (flow time
    above the base).  Coordinates are exact field elements or mpf."""

    x: object
    y: object

    def floats(self) -> tuple[float, float]:
        return float(self.x), float(self.y)


@dataclass(frozen=True)
class UnstableCurve:
    """Orbit segment of the translation flow: start point and duration.

    The duration is the unstable Margulis length of the segment (leaf
    Lebesgue measure in this linear model, with the Sum(lengths) = 1
    normalization)."""

    start: FlowPoint
    duration: object

    def __post_init__(self):
        if float(self.duration) < 0:
            raise ValueError("duration must be nonnegative")

    @property
    def T(self) -> float:
        return float(self.duration)


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

def _profile_eval(kind, x):
    tag = kind[0]
    if tag == "poly":
        return x ** kind[1]
    return math.cos(kind[1] * x + kind[2])


def _profile_antiderivative(kind, x):
    tag = kind[0]
    if tag == "poly":
        q = kind[1]
        return x ** (q + 1) / (q + 1)
    omega, phase = kind[1], kind[2]
    return math.sin(omega * x + phase) / omega


@dataclass(frozen=True)
class ProfileTerm:
    """coeff * H(x) * V(y) supported on one rectangle.

    H and V are ("poly", degree) or ("cos", omega, phase); x is the absolute
    base coordinate, y the height inside the cell.
    """

    cell: int
    coeff: float
    horizontal: tuple
    vertical: tuple

    def to_json(self):
        return {
            "cell": self.cell,
            "coeff": self.coeff,
            "horizontal": list(self.horizontal),
            "vertical": list(self.vertical),
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            cell=int(d["cell"]),
            coeff=float(d["coeff"]),
            horizontal=tuple(d["horizontal"]),
            vertical=tuple(d["vertical"]),
        )


class CellObservable:
    """Finite sum of ProfileTerms; class C^1 within cells, no continuity
    across cells required."""

    def __init__(self, model: PseudoAnosovModel, terms):
        self.model = model
        self.terms = tuple(terms)
        d = model.d
        self._heights = [float(h) for h in model.heights]
        self._starts, self._ends = _cell_bounds(model)
        # Per-cell full-crossing integrals G_a(x) in closed form:
        # polynomial coefficients (ascending) plus complex trig amplitudes.
        self._poly = [[0.0] for _ in range(d)]
        self._trig: list[dict] = [dict() for _ in range(d)]
        for t in self.terms:
            iv = _profile_antiderivative(t.vertical, self._heights[t.cell]) \
                - _profile_antiderivative(t.vertical, 0.0)
            c = t.coeff * iv
            if t.horizontal[0] == "poly":
                q = t.horizontal[1]
                p = self._poly[t.cell]
                while len(p) <= q:
                    p.append(0.0)
                p[q] += c
            else:
                omega, phase = t.horizontal[1], t.horizontal[2]
                amp = c * cmath.exp(1j * phase)
                tr = self._trig[t.cell]
                tr[omega] = tr.get(omega, 0j) + amp

    # -- pointwise and closed-form pieces ----------------------------------

    def value(self, cell: int, x: float, y: float) -> float:
        acc = 0.0
        for t in self.terms:
            if t.cell == cell:
                acc += t.coeff * _profile_eval(t.horizontal, x) * _profile_eval(t.vertical, y)
        return acc

    def crossing(self, cell: int, x: float) -> float:
        """Integral over one full vertical crossing of the cell at base x."""
        acc = 0.0
        p = self._poly[cell]
        for q in range(len(p) - 1, -1, -1):
            acc = acc * x + p[q]
        for omega, amp in self._trig[cell].items():
            acc += (amp * cmath.exp(1j * omega * x)).real
        return acc

    def partial(self, cell: int, x: float, y0: float, y1: float) -> float:
        """Integral along the vertical segment y0..y1 of the cell at base x."""
        acc = 0.0
        for t in self.terms:
            if t.cell == cell:
                iv = _profile_antiderivative(t.vertical, y1) - _profile_antiderivative(t.vertical, y0)
                acc += t.coeff * _profile_eval(t.horizontal, x) * iv
        return acc

    def mean(self) -> float:
        """Exact (closed-form) integral against the area measure; the model
        heights are normalized so the total area is 1."""
        acc = 0.0
        for t in self.terms:
            a, b = self._starts[t.cell], self._ends[t.cell]
            hi = _profile_antiderivative(t.horizontal, b) - _profile_antiderivative(t.horizontal, a)
            iv = _profile_antiderivative(t.vertical, self._heights[t.cell]) \
                - _profile_antiderivative(t.vertical, 0.0)
            acc += t.coeff * hi * iv
        return acc

    def to_json(self):
        return [t.to_json() for t in self.terms]

    @classmethod
    def from_json(cls, model, data):
        return cls(model, [ProfileTerm.from_json(d) for d in data])


def _cell_bounds(model: PseudoAnosovModel):
    starts = [0.0] * model.d
    ends = [0.0] * model.d
    acc = 0.0
    for lab in model.combinatorics.top:
        starts[lab] = acc
        acc += float(model.lengths[lab])
        ends[lab] = acc
    return starts, ends


def constant_observable(model: PseudoAnosovModel, value: float = 1.0) -> CellObservable:
    terms = [ProfileTerm(cell=a, coeff=value, horizontal=("poly", 0), vertical=("poly", 0))
             for a in range(model.d)]
    return CellObservable(model, terms)


def seeded_observable(model: PseudoAnosovModel, seed: int, degree: int = 2,
                      trig_per_cell: int = 1, zero_mean: bool = True) -> CellObservable:
    """Deterministic pseudo-random observable used by presets and sweeps."""
    import random

    rng = random.Random(seed)
    terms = []
    for cell in range(model.d):
        for q in range(degree + 1):
            terms.append(ProfileTerm(cell, rng.uniform(-1, 1), ("poly", q), ("poly", 0)))
        for _ in range(trig_per_cell):
            omega = 2 * math.pi * rng.randint(1, 3)
            terms.append(ProfileTerm(cell, rng.uniform(-1, 1),
                                     ("cos", omega, rng.uniform(0, 2 * math.pi)),
                                     ("cos", 2 * math.pi * rng.randint(1, 2) / float(model.heights[cell]),
                                      rng.uniform(0, 2 * math.pi))))
    obs = CellObservable(model, terms)
    if zero_mean:
        mu = obs.mean()
        terms = list(obs.terms)
        for cell in range(model.d):
            terms.append(ProfileTerm(cell, -mu, ("poly", 0), ("poly", 0)))
        obs = CellObservable(model, terms)
    return obs


# ---------------------------------------------------------------------------
# the suspension: exact flow and locate machinery
# ---------------------------------------------------------------------------

class Suspension:
    """Cached exact/float geometry of one model's suspension."""

    def __init__(self, model: PseudoAnosovModel):
        self.model = model
        self.field = model.field
        d = model.d
        self.d = d
        zero = model.field.zero
        self.starts = [zero] * d
        self.ends = [zero] * d
        acc = zero
        for lab in model.combinatorics.top:
            self.starts[lab] = acc
            acc = acc + model.lengths[lab]
            self.ends[lab] = acc
        self.starts_f = [float(v) for v in self.starts]
        self.ends_f = [float(v) for v in self.ends]
        self.top_order = model.combinatorics.top
        self.translations = _translations(model.combinatorics, model.lengths)
        self.translations_f = [float(t) for t in self.translations]
        self.heights = model.heights
        self.heights_f = [float(h) for h in model.heights]
        self.lam_f = model.lam_float
        self.log_lam = math.log(self.lam_f)
        self._lam_pows: dict[int, FieldElement] = {0: model.field.one}

    def lam_pow(self, k: int) -> FieldElement:
        if k not in self._lam_pows:
            self._lam_pows[k] = self.field.gen_power(k)
        return self._lam_pows[k]

    # -- locate -------------------------------------------------------------

    def locate_float(self, x: float) -> int:
        for lab in self.top_order:
            if x < self.ends_f[lab]:
                return lab
        if x < 1.0 + 1e-12:
            return self.top_order[-1]
        raise ValueError(f"base coordinate {x} outside [0,1)")

    def locate(self, x) -> int:
        """Label of the base interval containing x (half-open convention)."""
        if not isinstance(x, FieldElement):
            return self.locate_float(float(x))
        xf = float(x)
        small = x.den.bit_length() < 48 and all(abs(n).bit_length() < 48 for n in x.nums)
        for lab in self.top_order:
            e = self.ends_f[lab]
            if small and xf < e - 1e-9:
                return lab
            if small and xf > e + 1e-9:
                continue
            if (x - self.ends[lab]).sign() < 0:
                return lab
        raise ValueError(f"base coordinate {xf} outside [0,1)")

    def _division_point(self, x: FieldElement) -> bool:
        if x.is_zero():
            return True
        for lab in self.top_order[1:]:
            if x == self.starts[lab]:
                return True
        return False

    def iet_apply(self, x):
        """One step of the base interval exchange; raises HitSingularity when
        the orbit starts from or lands exactly on a division point (the
        vertical through it carries a cone point)."""
        if isinstance(x, FieldElement):
            if self._division_point(x):
                raise HitSingularity("orbit crossed a cone point exactly")
            lab = self.locate(x)
            out = x + self.translations[lab]
            if self._division_point(out):
                raise HitSingularity("orbit landed on a cone point exactly")
            return out
        lab = self.locate_float(float(x))
        return x + self.translations_f[lab] if isinstance(x, float) \
            else x + self.translations[lab].to_mpf()

    def iet_apply_depth(self, x, k: int):
        """First-return map to the depth-k base (the 1/lambda^k copy)."""
        if k == 0:
            return self.iet_apply(x)
        if isinstance(x, FieldElement):
            scaled = x * self.lam_pow(k)
            if self._division_point(scaled):
                raise HitSingularity("orbit crossed a cone point exactly")
            lab = self.locate(scaled)
            out = x + self.translations[lab] * self.lam_pow(-k)
            if self._division_point(out * self.lam_pow(k)):
                raise HitSingularity("orbit landed on a cone point exactly")
            return out
        xf = float(x) * self.lam_f ** k
        lab = self.locate_float(xf)
        step = self.translations_f[lab] / self.lam_f ** k
        return x + step if isinstance(x, float) else x + mpmath.mpf(step)

    def locate_depth(self, x, k: int) -> int:
        if k == 0:
            return self.locate(x)
        if isinstance(x, FieldElement):
            return self.locate(x * self.lam_pow(k))
        return self.locate_float(float(x) * self.lam_f ** k)

    def in_depth_base(self, x, k: int) -> bool:
        if k == 0:
            return True
        if isinstance(x, FieldElement):
            return (x * self.lam_pow(k) - self.field.one).sign() < 0
        return float(x) * self.lam_f ** k < 1.0

    def height_of(self, lab: int, k: int = 0):
        return self.heights[lab] * self.lam_pow(k) if k else self.heights[lab]

    # -- flow ---------------------------------------------------------------

    def flow(self, p: FlowPoint, dt) -> FlowPoint:
        """Time-dt translation flow; exact when all inputs are exact."""
        x = _as_coord(self.model, p.x)
        y = _as_coord(self.model, p.y)
        exact = isinstance(x, FieldElement) and isinstance(y, FieldElement) \
            and isinstance(dt, FieldElement)
        if not exact and isinstance(dt, FieldElement):
            dt = dt.to_mpf()
        if not exact:
            if isinstance(x, FieldElement):
                x = x.to_mpf(_MPF_PREC_BITS)
            if isinstance(y, FieldElement):
                y = y.to_mpf(_MPF_PREC_BITS)
            dt = mpmath.mpf(dt)
        rem = dt
        while True:
            lab = self.locate(x)
            h = self.heights[lab] if exact else mpmath.mpf(self.heights_f[lab])
            gap = h - y
            if exact:
                if (rem - gap).sign() < 0:
                    return FlowPoint(x, y + rem)
            elif rem < gap:
                return FlowPoint(x, y + rem)
            rem = rem - gap
            x = self.iet_apply(x)
            y = y - y  # typed zero


_SUSP_CACHE: dict[int, Suspension] = {}
_MODEL_REFS: dict[int, PseudoAnosovModel] = {}


def suspension_of(model: PseudoAnosovModel) -> Suspension:
    key = id(model)
    if key not in _SUSP_CACHE:
        _SUSP_CACHE[key] = Suspension(model)
        _MODEL_REFS[key] = model
    return _SUSP_CACHE[key]


def flow_step(model: PseudoAnosovModel, p: FlowPoint, dt) -> FlowPoint:
    """Public flow operation: semigroup-exact in Q(lambda) arithmetic."""
    return suspension_of(model).flow(p, dt)


def apply_pa(model: PseudoAnosovModel, curve: UnstableCurve, k: int = 1) -> UnstableCurve:
    """Image of a curve under the pseudo-Anosov map iterated k times: the
    start point renormalizes x -> x/lambda^k, the duration scales by
    lambda^k."""
    susp = suspension_of(model)
    x = _as_coord(model, curve.start.x)
    y = _as_coord(model, curve.start.y)
    if isinstance(x, FieldElement):
        new_x = x * susp.lam_pow(-k)
    else:
        new_x = x / mpmath.mpf(susp.lam_f) ** k
    if isinstance(y, FieldElement):
        lifted = y * susp.lam_pow(k)
    else:
        lifted = y * mpmath.mpf(susp.lam_f) ** k
    start = susp.flow(FlowPoint(new_x, type(lifted)(0) if not isinstance(lifted, FieldElement)
                                else model.field.zero), lifted) \
        if float(lifted) > 0 else FlowPoint(new_x, lifted)
    if isinstance(curve.duration, FieldElement):
        dur = curve.duration * susp.lam_pow(k)
    else:
        dur = curve.duration * susp.lam_f ** k
    return UnstableCurve(start=start, duration=dur)


# ---------------------------------------------------------------------------
# renormalization towers
# ---------------------------------------------------------------------------

def _poly_shift(coeffs, tau) -> list:
    """Coefficients of p(x + tau) from those of p(x), extended precision."""
    n = len(coeffs)
    out = [_LD(0)] * n
    binom = [[1]]
    for i in range(1, n):
        row = [1]
        for j in range(1, i):
            row.append(binom[i - 1][j - 1] + binom[i - 1][j])
        row.append(1)
        binom.append(row)
    tau = _LD(tau)
    pw = [_LD(1)]
    for _ in range(n - 1):
        pw.append(pw[-1] * tau)
    for q in range(n):
        c = coeffs[q]
        if c == 0.0:
            continue
        for j in range(q + 1):
            out[j] = out[j] + c * binom[q][j] * pw[q - j]
    return out


class _TowerFn:
    """Closed form of the integral over one full tower crossing.

    The polynomial part is stored in the depth-local coordinate z = lambda^k x
    (so its coefficients stay at the scale of the tower values instead of
    growing like lambda^(q+1)k); the trigonometric part stays in the absolute
    coordinate, where shifts are pure phases."""

    __slots__ = ("poly", "trig")

    def __init__(self, poly, trig):
        self.poly = poly
        self.trig = trig

    def value(self, x: float, z: float) -> float:
        z = _LD(z)
        acc = _LD(0)
        p = self.poly
        for q in range(len(p) - 1, -1, -1):
            acc = acc * z + p[q]
        if self.trig:
            xl = _LD(x)
            for omega, amp in self.trig.items():
                acc = acc + (amp * np.exp(_CLD(1j) * _LD(omega) * xl)).real
        return float(acc)

    def shifted(self, tau_x: float, tau_z: float) -> "_TowerFn":
        trig = {omega: amp * np.exp(_CLD(1j) * _LD(omega) * _LD(tau_x))
                for omega, amp in self.trig.items()}
        return _TowerFn(_poly_shift(self.poly, tau_z), trig)

    def plus(self, other: "_TowerFn") -> "_TowerFn":
        n = max(len(self.poly), len(other.poly))
        poly = [_LD(0)] * n
        for i, c in enumerate(self.poly):
            poly[i] = poly[i] + c
        for i, c in enumerate(other.poly):
            poly[i] = poly[i] + c
        trig = dict(self.trig)
        for omega, amp in other.trig.items():
            trig[omega] = trig.get(omega, _CLD(0)) + amp
        return _TowerFn(poly, trig)

    def rescaled(self, factor: float) -> "_TowerFn":
        """Rebase the polynomial from z to z' = factor * z."""
        f = _LD(factor)
        poly = [c / f ** q for q, c in enumerate(self.poly)]
        return _TowerFn(poly, dict(self.trig))

    def definite_integral(self, ax: float, bx: float, scale: float) -> float:
        """Integral in the absolute coordinate over [ax, bx]; z = scale * x."""
        acc = _LD(0)
        s = _LD(scale)
        az, bz = _LD(ax) * s, _LD(bx) * s
        for q, c in enumerate(self.poly):
            acc = acc + c * (bz ** (q + 1) - az ** (q + 1)) / ((q + 1) * s)
        for omega, amp in self.trig.items():
            om = _LD(omega)
            term = amp * (np.exp(_CLD(1j) * om * _LD(bx)) - np.exp(_CLD(1j) * om * _LD(ax)))
            acc = acc + (term / (_CLD(1j) * om)).real
        return float(acc)


class TowerTable:
    """Special Birkhoff integrals over renormalization towers of one
    observable, with exact tower heights alongside."""

    def __init__(self, model: PseudoAnosovModel, obs: CellObservable):
        self.model = model
        self.obs = obs
        self.susp = suspension_of(model)
        d = model.d
        base = []
        for lab in range(d):
            base.append(_TowerFn([_LD(c) for c in obs._poly[lab]],
                                 {om: _CLD(a) for om, a in obs._trig[lab].items()}))
        self.levels: list[list[_TowerFn]] = [base]
        self.heights_f: list[list[float]] = [list(self.susp.heights_f)]
        # stage translations at extended precision (phase errors otherwise
        # rotate the large accumulated amplitudes out of tolerance)
        self._lam_ld = _ld_exact(model.field.gen)
        self._tau_ld = []
        for st in model.stages:
            lab = st.loser if st.side == "t" else st.winner
            self._tau_ld.append(_ld_exact(st.translations[lab]))

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def ensure_depth(self, k: int):
        while self.depth < k:
            self._extend()

    def _extend(self):
        """One more renormalization level: replay the loop stage by stage.

        Stage translations live at scale lambda^(-k) in the absolute
        coordinate but are O(1) in the depth-local polynomial coordinate."""
        model = self.model
        k = self.depth
        scale_x = self._lam_ld ** (-k)
        cur = [fn for fn in self.levels[k]]
        for st, tau in zip(model.stages, self._tau_ld):
            if st.side == "t":
                cur[st.loser] = cur[st.loser].plus(
                    cur[st.winner].shifted(tau * scale_x, tau))
            else:
                cur[st.loser] = cur[st.winner].plus(
                    cur[st.loser].shifted(tau * scale_x, tau))
        # rebase z from lambda^k x to lambda^(k+1) x
        self.levels.append([fn.rescaled(self._lam_ld) for fn in cur])
        self.heights_f.append([h * model.lam_float for h in self.heights_f[-1]])

    def crossing(self, k: int, lab: int, x: float, z: float | None = None) -> float:
        self.ensure_depth(k)
        if z is None:
            z = x * self.model.lam_float ** k
        return self.levels[k][lab].value(x, z)

    def tower_height_f(self, k: int, lab: int) -> float:
        self.ensure_depth(k)
        return self.heights_f[k][lab]

    def average_crossing(self, k: int, lab: int) -> float:
        """Average of the depth-k crossing integral over its base interval."""
        self.ensure_depth(k)
        susp = self.susp
        scale = self.model.lam_float ** k
        a = susp.starts_f[lab] / scale
        b = susp.ends_f[lab] / scale
        return self.levels[k][lab].definite_integral(a, b, scale) / (b - a)


_TOWER_CACHE: dict[tuple[int, int], TowerTable] = {}


def tower_table(model: PseudoAnosovModel, obs: CellObservable) -> TowerTable:
    key = (id(model), id(obs))
    if key not in _TOWER_CACHE:
        _TOWER_CACHE[key] = TowerTable(model, obs)
    return _TOWER_CACHE[key]


# ---------------------------------------------------------------------------
# Birkhoff integrals
# ---------------------------------------------------------------------------

def mean(model: PseudoAnosovModel, f: CellObservable) -> float:
    """Integral of f against the unique invariant probability (area) measure."""
    return f.mean()


def _max_useful_depth(susp: Suspension, rem_f: float) -> int:
    if rem_f <= 0:
        return 0
    min_h = min(susp.heights_f)
    return max(0, int(math.floor(math.log(rem_f / min_h) / susp.log_lam)) + 1)


def birkhoff_integral(model: PseudoAnosovModel, f: CellObservable, p, T) -> float:
    """Accelerated integral of f along the flow orbit of duration T from p.

    p may be a FlowPoint or a bare base coordinate (y = 0).  Tower crossings
    are resolved greedily from the deepest admissible renormalization level,
    so the cost is O(d^2 log T) after the tower tables are built.
    """
    if not isinstance(p, FlowPoint):
        p = FlowPoint(_as_coord(model, p), model.field.zero)
    table = tower_table(model, f)
    susp = suspension_of(model)
    x = _as_coord(model, p.x)
    y = _as_coord(model, p.y)
    rem_f = float(T)
    total = 0.0
    yf = float(y)
    if yf > 0:
        lab = susp.locate(x)
        gap = susp.heights_f[lab] - yf
        if rem_f < gap:
            return f.partial(lab, float(x), yf, yf + rem_f)
        total += f.partial(lab, float(x), yf, susp.heights_f[lab])
        rem_f -= gap
        x = susp.iet_apply(x)

    kmax_global = _max_useful_depth(susp, rem_f)
    table.ensure_depth(kmax_global)
    exact = isinstance(x, FieldElement)
    lam = susp.lam_f
    while rem_f > 0:
        xf = float(x)
        if xf <= 0:
            k_pos = kmax_global
        else:
            k_pos = min(kmax_global, max(0, int(math.floor(-math.log(xf) / susp.log_lam)) + 1))
        took = False
        for k in range(k_pos, -1, -1):
            if exact:
                scaled = x * susp.lam_pow(k) if k else x
                if k and (scaled - susp.field.one).sign() >= 0:
                    continue
                lab = susp.locate(scaled)
                zf = float(scaled)
            else:
                zf = xf * lam ** k
                if k and zf >= 1.0:
                    continue
                lab = susp.locate_float(zf)
            h = table.tower_height_f(k, lab)
            if h <= rem_f:
                total += table.crossing(k, lab, xf, zf)
                rem_f -= h
                x = susp.iet_apply_depth(x, k)
                took = True
                break
        if not took:
            lab = susp.locate(x)
            total += f.partial(lab, float(x), 0.0, rem_f)
            rem_f = 0.0
    return total


def naive_birkhoff_integral(model: PseudoAnosovModel, f: CellObservable, p, T) -> float:
    """Independent oracle: crossing-by-crossing flow summation (no towers).

    The consumed time is tracked in exact arithmetic when the start is exact
    (held as a field element), and the crossing values are combined with
    compensated summation, so the oracle stays sharp over 10^4 crossings."""
    if not isinstance(p, FlowPoint):
        p = FlowPoint(_as_coord(model, p), model.field.zero)
    susp = suspension_of(model)
    x = _as_coord(model, p.x)
    yf = float(p.y)
    t_total = float(T)
    exact = isinstance(x, FieldElement)
    pieces = []
    offset = 0.0
    if yf > 0:
        lab = susp.locate(x)
        gap = susp.heights_f[lab] - yf
        if t_total < gap:
            return f.partial(lab, float(x), yf, yf + t_total)
        pieces.append(f.partial(lab, float(x), yf, susp.heights_f[lab]))
        x = susp.iet_apply(x)
        offset = gap
    consumed_exact = model.field.zero if exact else None
    consumed_f = 0.0
    while True:
        lab = susp.locate(x)
        rem = t_total - offset - (float(consumed_exact) if exact else consumed_f)
        if rem < susp.heights_f[lab]:
            if rem > 0:
                pieces.append(f.partial(lab, float(x), 0.0, rem))
            return math.fsum(pieces)
        pieces.append(f.crossing(lab, float(x)))
        if exact:
            consumed_exact = consumed_exact + susp.heights[lab]
        else:
            consumed_f += susp.heights_f[lab]
        x = susp.iet_apply(x)
