"""Hyperbolic toral maps: linear cat maps and small trigonometric
perturbations.

Covers the invariant-cone verification, unstable direction fields, the
transfer-primitive construction (pullback series for the unstable current),
and exact Fourier-lattice correlations for the linear case, where the
measure of maximal entropy is Haar measure and correlations reduce to
integer-lattice frequency matching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cohomology import IntegerMatrix, SpectralSplit, spectral_split
from .errors import (
    NoConvergence,
    NotHyperbolic,
    PerturbationTooLarge,
    ResolutionInsufficient,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TrigObservable:
    """Finite trigonometric polynomial on the 2-torus.

    coeffs maps integer frequency pairs to complex amplitudes; the function
    is sum_k c_k exp(2 pi i k.x).  Real-valued iff conjugate-symmetric.
    """

    coeffs: tuple  # tuple of ((k1, k2), complex)

    @classmethod
    def from_dict(cls, d: dict) -> "TrigObservable":
        items = tuple(sorted(((int(k[0]), int(k[1])), complex(v))
                             for k, v in d.items()))
        return cls(coeffs=items)

    def as_dict(self) -> dict:
        return {k: v for k, v in self.coeffs}

    def is_real(self, tol: float = 1e-12) -> bool:
        d = self.as_dict()
        for k, v in d.items():
            w = d.get((-k[0], -k[1]), 0j)
            if abs(v.conjugate() - w) > tol:
                return False
        return True

    @property
    def mean(self) -> complex:
        return self.as_dict().get((0, 0), 0j)

    def value(self, x) -> complex:
        x = np.asarray(x, dtype=float)
        acc = np.zeros(x[..., 0].shape, dtype=complex)
        for (k1, k2), c in self.coeffs:
            acc += c * np.exp(2j * math.pi * (k1 * x[..., 0] + k2 * x[..., 1]))
        return acc if acc.shape else complex(acc)

    def value_real(self, x) -> float:
        return float(np.real(self.value(np.asarray(x))))

    def grid_values(self, n: int) -> np.ndarray:
        xs = np.arange(n) / n
        gx, gy = np.meshgrid(xs, xs, indexing="ij")
        acc = np.zeros((n, n), dtype=complex)
        for (k1, k2), c in self.coeffs:
            acc += c * np.exp(2j * math.pi * (k1 * gx + k2 * gy))
        return acc

    def gradient(self) -> tuple["TrigObservable", "TrigObservable"]:
        dx = {k: 2j * math.pi * k[0] * v for k, v in self.coeffs}
        dy = {k: 2j * math.pi * k[1] * v for k, v in self.coeffs}
        return TrigObservable.from_dict(dx), TrigObservable.from_dict(dy)

    def l1_norm(self) -> float:
        return float(sum(abs(v) for _, v in self.coeffs))

    def to_json(self):
        return [{"k": [k[0], k[1]], "re": v.real, "im": v.imag}
                for k, v in self.coeffs]

    @classmethod
    def from_json(cls, lst) -> "TrigObservable":
        return cls.from_dict({(int(e["k"][0]), int(e["k"][1])):
                              complex(e["re"], e.get("im", 0.0)) for e in lst})


def random_zero_mean_trig(rng, max_freq: int = 5, n_modes: int = 4) -> TrigObservable:
    """Random real zero-mean trig polynomial with frequencies <= max_freq."""
    d: dict = {}
    for _ in range(n_modes):
        while True:
            k = (rng.randint(-max_freq, max_freq), rng.randint(-max_freq, max_freq))
            if k != (0, 0):
                break
        c = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        d[k] = d.get(k, 0j) + c
        mk = (-k[0], -k[1])
        d[mk] = d.get(mk, 0j) + c.conjugate()
    return TrigObservable.from_dict(d)


@dataclass(frozen=True)
class TrigVectorField:
    """Perturbation field psi = (psi1, psi2), both trig polynomials."""

    comp1: TrigObservable
    comp2: TrigObservable

    def value(self, x) -> np.ndarray:
        return np.stack([np.real(self.comp1.value(x)), np.real(self.comp2.value(x))], axis=-1)

    def jacobian(self, x) -> np.ndarray:
        d1x, d1y = self.comp1.gradient()
        d2x, d2y = self.comp2.gradient()
        return np.array([
            [np.real(d1x.value(x)), np.real(d1y.value(x))],
            [np.real(d2x.value(x)), np.real(d2y.value(x))],
        ])


ZERO_FIELD = TrigVectorField(TrigObservable(()), TrigObservable(()))


@dataclass(frozen=True)
class ToralMap:
    """x -> L x + eps psi(x) mod 1 with verified invariant unstable cones."""

    linear_part: IntegerMatrix
    perturbation: TrigVectorField
    eps: float
    cone_half_width: float
    cone_margin: float       # worst image ratio on the grid; < 1 required
    cone_bound: float        # largest eps verified on the grid (inf if linear)
    split: SpectralSplit = field(repr=False)

    @property
    def is_linear(self) -> bool:
        return self.eps == 0.0

    @property
    def lam(self) -> float:
        return self.split.lam

    @property
    def h_top(self) -> float:
        return self.split.h_top

    def L(self) -> np.ndarray:
        return self.linear_part.to_numpy()

    def unstable_eigvec(self) -> np.ndarray:
        l_np = self.L()
        w, v = np.linalg.eig(l_np)
        i = int(np.argmax(np.abs(w)))
        vec = np.real(v[:, i])
        vec /= np.linalg.norm(vec)
        if vec[0] < 0 or (vec[0] == 0 and vec[1] < 0):
            vec = -vec
        return vec

    def stable_eigvec(self) -> np.ndarray:
        l_np = self.L()
        w, v = np.linalg.eig(l_np)
        i = int(np.argmin(np.abs(w)))
        vec = np.real(v[:, i])
        vec /= np.linalg.norm(vec)
        if vec[0] < 0 or (vec[0] == 0 and vec[1] < 0):
            vec = -vec
        return vec

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = x @ self.L().T
        if self.eps:
            y = y + self.eps * self.perturbation.value(x)
        return np.mod(y, 1.0)

    def jacobian(self, x) -> np.ndarray:
        j = self.L().copy()
        if self.eps:
            j = j + self.eps * self.perturbation.jacobian(np.asarray(x, dtype=float))
        return j

    def apply_inverse(self, x, tol: float = 1e-13) -> np.ndarray:
        """Newton inversion of the perturbed map (exact inverse if linear)."""
        x = np.asarray(x, dtype=float)
        l_inv = np.linalg.inv(self.L())
        y = np.mod(x @ l_inv.T, 1.0)
        if not self.eps:
            return y
        for _ in range(60):
            fy = self.apply(y)
            diff = np.mod(fy - x + 0.5, 1.0) - 0.5
            if np.max(np.abs(diff)) < tol:
                return np.mod(y, 1.0)
            y = y - np.linalg.solve(self.jacobian(y), diff)
        raise NoConvergence("map inversion did not converge")

    def expansion_cocycle(self, x, n: int) -> float:
        """nu_n(x): stretch of the unstable direction field along the orbit."""
        v = unstable_direction(self, x, n=max(n + 20, 40), tol=1e-10)
        acc = 1.0
        cur = np.asarray(x, dtype=float)
        for _ in range(n):
            w = self.jacobian(cur) @ v
            acc *= np.linalg.norm(w)
            v = w / np.linalg.norm(w)
            cur = self.apply(cur)
        return acc


def _cone_worst_ratio(l_np, pert: TrigVectorField, eps: float, kappa: float,
                      grid: int, directions: int) -> float:
    """Worst post-image |stable|/(kappa |unstable|) ratio over the grid."""
    w, v = np.linalg.eig(l_np)
    iu = int(np.argmax(np.abs(w)))
    st = int(np.argmin(np.abs(w)))
    u = np.real(v[:, iu])
    s = np.real(v[:, st])
    basis = np.column_stack([u, s])
    to_eig = np.linalg.inv(basis)
    xs = np.arange(grid) / grid
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    if eps:
        jac = np.empty((pts.shape[0], 2, 2))
        jac[:] = l_np
        jbig = pert.jacobian(pts)  # (2, 2, npts)
        jac += eps * np.moveaxis(jbig, -1, 0)
    else:
        jac = np.broadcast_to(l_np, (pts.shape[0], 2, 2))
    worst = 0.0
    for i in range(directions):
        t = kappa * (2.0 * i / (directions - 1) - 1.0)
        vec = u + t * s
        img = jac @ vec
        eig_coords = img @ to_eig.T
        ratio = np.abs(eig_coords[:, 1]) / (kappa * np.abs(eig_coords[:, 0]))
        worst = max(worst, float(np.max(ratio)))
    return worst


def make_toral_map(L: IntegerMatrix, psi: TrigVectorField = ZERO_FIELD,
                   eps: float = 0.0, kappa: float = 0.5, grid: int = 256,
                   directions: int = 8) -> ToralMap:
    """Construct a toral map with a verified invariant unstable cone family.

    The cone of half-width kappa about the unstable eigendirection must map
    strictly into itself at every point of the grid x grid verification
    lattice, sampled along `directions` boundary/interior directions; the
    largest eps passing the check is stored as the cone bound.
    """
    if L.dim != 2 or L.determinant() != 1 or abs(L.entries[0][0] + L.entries[1][1]) <= 2:
        raise NotHyperbolic("need a 2x2 integer matrix, det 1, |trace| > 2")
    l_np = L.to_numpy()
    split = spectral_split(L)
    if eps == 0.0:
        return ToralMap(L, psi, 0.0, kappa, _cone_worst_ratio(l_np, psi, 0.0, kappa, 16, directions),
                        math.inf, split)
    worst = _cone_worst_ratio(l_np, psi, eps, kappa, grid, directions)
    if worst >= 1.0:
        raise PerturbationTooLarge(
            f"cone field not invariant at eps={eps} (worst ratio {worst:.3f})")
    # bisect the largest verified eps on the same grid
    lo, hi = eps, max(eps * 2, 1e-3)
    for _ in range(12):
        if _cone_worst_ratio(l_np, psi, hi, kappa, grid, directions) < 1.0:
            lo, hi = hi, hi * 2
        else:
            break
    for _ in range(16):
        mid = 0.5 * (lo + hi)
        if _cone_worst_ratio(l_np, psi, mid, kappa, grid, directions) < 1.0:
            lo = mid
        else:
            hi = mid
    return ToralMap(L, psi, eps, kappa, worst, lo, split)


def unstable_direction(m: ToralMap, x, n: int, tol: float = 1e-12) -> np.ndarray:
    """Unit tangent of the unstable foliation at x.

    Pushes a cone vector forward along the backward orbit through x for n
    steps; the Cauchy increment between n-1 and n steps must be below tol."""
    x = np.asarray(x, dtype=float)
    back = [x]
    for _ in range(n):
        back.append(m.apply_inverse(back[-1]))

    def push(steps: int) -> np.ndarray:
        vec = m.unstable_eigvec()
        for j in range(steps, 0, -1):
            vec = m.jacobian(back[j]) @ vec
            vec /= np.linalg.norm(vec)
        return vec

    v = push(n)
    if n >= 1:
        v_prev = push(n - 1)
        inc = min(np.linalg.norm(v - v_prev), np.linalg.norm(v + v_prev))
        if inc > tol:
            raise NoConvergence(f"direction increment {inc:.3e} above tol at n={n}")
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    return v


# ---------------------------------------------------------------------------
# transfer primitive and the unstable current
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicFunction:
    """Function on the torus sampled on an n x n grid, with helpers."""

    values: np.ndarray  # real (n, n)

    @property
    def grid(self) -> int:
        return self.values.shape[0]

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def mean(self) -> float:
        return float(np.mean(self.values))


def _spectral_antiderivative(r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """Solve du = (r1, r2) on the grid in the mean-zero gauge.

    The exterior derivative is diagonal in frequency: u_hat(k) is read off
    whichever component has a nonzero frequency index."""
    n = r1.shape[0]
    f1 = np.fft.fft2(r1)
    f2 = np.fft.fft2(r2)
    k = np.fft.fftfreq(n, d=1.0 / n)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    u_hat = np.zeros_like(f1)
    with np.errstate(divide="ignore", invalid="ignore"):
        use1 = k1 != 0
        u_hat[use1] = f1[use1] / (2j * math.pi * k1[use1] * n) * n
        only2 = (~use1) & (k2 != 0)
        u_hat[only2] = f2[only2] / (2j * math.pi * k2[only2] * n) * n
    u_hat[0, 0] = 0.0
    return np.real(np.fft.ifft2(u_hat))


def transfer_primitive(m: ToralMap, C, grid: int = 256,
                       tol: float = 1e-8) -> PeriodicFunction:
    """Solve the conjugation equation for constant forms: the pullback of the
    constant 1-form alpha(C) differs from alpha of the induced-action image
    by du; returns u with grid-mean zero.

    Raises ResolutionInsufficient when the verified residual exceeds tol."""
    c_vec = np.asarray(C, dtype=float)
    n = grid
    xs = np.arange(n) / n
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    if m.eps:
        jpert = m.perturbation.jacobian(pts)  # (2, 2, npts)
        r1 = m.eps * (jpert[0, 0] * c_vec[0] + jpert[1, 0] * c_vec[1]).reshape(n, n)
        r2 = m.eps * (jpert[0, 1] * c_vec[0] + jpert[1, 1] * c_vec[1]).reshape(n, n)
    else:
        r1 = np.zeros((n, n))
        r2 = np.zeros((n, n))
    u = _spectral_antiderivative(np.real(r1), np.real(r2))
    # verify: grid derivative of u (spectral) against the residual form
    f = np.fft.fft2(u)
    k = np.fft.fftfreq(n, d=1.0 / n)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    du1 = np.real(np.fft.ifft2(2j * math.pi * k1 * f))
    du2 = np.real(np.fft.ifft2(2j * math.pi * k2 * f))
    resid = max(float(np.max(np.abs(du1 - r1))), float(np.max(np.abs(du2 - r2))))
    if resid > tol:
        raise ResolutionInsufficient(f"residual {resid:.3e} above tol on {n}x{n} grid")
    return PeriodicFunction(values=u)


@dataclass(frozen=True)
class CurrentHandle:
    """Truncated expanding current: cohomology class, harmonic part, and the
    potential U_N on a grid with its geometric tail bound."""

    cohomology_class: np.ndarray
    harmonic: np.ndarray          # constant form coefficients (= class)
    potential: PeriodicFunction   # U_N
    truncation_depth: int
    tail_bound: float

    def pair_constant_form(self, eta: np.ndarray) -> float:
        """Pairing with the constant form eta1 dx + eta2 dy (exact)."""
        c = self.cohomology_class
        return float(c[0] * eta[1] - c[1] * eta[0])


def _unit_class_sup(m: ToralMap, grid: int) -> float:
    sup = 0.0
    for c_vec in ((1.0, 0.0), (0.0, 1.0)):
        sup = max(sup, transfer_primitive(m, c_vec, grid=grid).sup())
    return sup


def build_unstable_current(m: ToralMap, C, depth: int,
                           grid: int = 256) -> CurrentHandle:
    """Iterated-pullback construction of the expanding current of class C.

    Iterating the conjugation identity gives the potential as the series
    U_N = sum_{k=1..N} lambda^(-k) u(C) o A^(k-1) (the first term is the
    primitive itself); the geometric series converges at rate 1/lambda,
    giving the stored tail bound."""
    c_vec = np.asarray(C, dtype=float)
    lam = m.lam
    u = transfer_primitive(m, c_vec, grid=grid)
    n = grid
    xs = np.arange(n) / n
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    u_n = np.zeros((n, n))
    if m.eps:
        cur = pts.copy()
        fhat = np.fft.fft2(u.values)
        k = np.fft.fftfreq(n, d=1.0 / n)
        k1g, k2g = np.meshgrid(k, k, indexing="ij")

        def sample_u(points):
            # trig synthesis of the grid function at arbitrary points
            acc = np.zeros(points.shape[0])
            nz = np.abs(fhat) > 1e-13 * n * n
            idx = np.argwhere(nz)
            for i, j in idx:
                coef = fhat[i, j] / (n * n)
                acc += np.real(coef * np.exp(2j * math.pi *
                                             (k1g[i, j] * points[:, 0] + k2g[i, j] * points[:, 1])))
            return acc

        for step in range(1, depth + 1):
            u_n += lam ** (-step) * sample_u(cur).reshape(n, n)
            cur = m.apply(cur)
    sup_u = _unit_class_sup(m, grid) * float(np.linalg.norm(c_vec))
    tail = sup_u * lam ** (-depth) / (1.0 - 1.0 / lam)
    return CurrentHandle(
        cohomology_class=c_vec,
        harmonic=c_vec,
        potential=PeriodicFunction(values=u_n),
        truncation_depth=depth,
        tail_bound=tail,
    )


@dataclass(frozen=True)
class GridForm:
    """A C^1 1-form sampled on the grid: components and exterior-derivative
    density, enough to pair against current handles."""

    eta1: np.ndarray
    eta2: np.ndarray
    deta: np.ndarray  # density of d(eta) against dx ^ dy

    @classmethod
    def from_trig(cls, eta1: TrigObservable, eta2: TrigObservable, grid: int) -> "GridForm":
        d1x, d1y = eta1.gradient()
        d2x, d2y = eta2.gradient()
        return cls(
            eta1=np.real(eta1.grid_values(grid)),
            eta2=np.real(eta2.grid_values(grid)),
            deta=np.real(d2x.grid_values(grid)) - np.real(d1y.grid_values(grid)),
        )

    def c1_norm_proxy(self) -> float:
        return float(max(np.max(np.abs(self.eta1)), np.max(np.abs(self.eta2)),
                         np.max(np.abs(self.deta)) / TWO_PI))


def pair_current(handle: CurrentHandle, form: GridForm) -> float:
    """<B, eta> = integral of alpha(C) wedge eta + dU wedge eta."""
    c = handle.cohomology_class
    const_part = c[0] * float(np.mean(form.eta2)) - c[1] * float(np.mean(form.eta1))
    du_part = -float(np.mean(handle.potential.values * form.deta))
    return const_part + du_part


def pullback_form(m: ToralMap, eta1: TrigObservable, eta2: TrigObservable,
                  grid: int) -> GridForm:
    """A* eta sampled on the grid: (DA)^T eta(A x), with d(A* eta) = A*(d eta)."""
    n = grid
    xs = np.arange(n) / n
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    img = m.apply(pts)
    e1 = np.real(eta1.value(img))
    e2 = np.real(eta2.value(img))
    l_np = m.L()
    if m.eps:
        jp = m.perturbation.jacobian(pts)
        j11 = l_np[0, 0] + m.eps * jp[0, 0]
        j12 = l_np[0, 1] + m.eps * jp[0, 1]
        j21 = l_np[1, 0] + m.eps * jp[1, 0]
        j22 = l_np[1, 1] + m.eps * jp[1, 1]
        det = j11 * j22 - j12 * j21
    else:
        j11, j12, j21, j22 = l_np[0, 0], l_np[0, 1], l_np[1, 0], l_np[1, 1]
        det = 1.0
    p1 = j11 * e1 + j21 * e2
    p2 = j12 * e1 + j22 * e2
    d1x, d1y = eta1.gradient()
    d2x, d2y = eta2.gradient()
    deta_img = np.real(d2x.value(img)) - np.real(d1y.value(img))
    return GridForm(
        eta1=np.asarray(p1).reshape(n, n),
        eta2=np.asarray(p2).reshape(n, n),
        deta=(np.asarray(deta_img) * det).reshape(n, n),
    )


def torus_battery(count: int = 10, seed: int = 4242, grid: int = 256) -> list[GridForm]:
    """Fixed battery of C^1 1-forms of unit (proxy) C^1 norm."""
    import random

    rng = random.Random(seed)
    out = []
    for _ in range(count):
        eta1 = random_zero_mean_trig(rng, max_freq=3, n_modes=3)
        eta2 = random_zero_mean_trig(rng, max_freq=3, n_modes=3)
        gf = GridForm.from_trig(eta1, eta2, grid)
        norm = max(gf.c1_norm_proxy(), 1e-12)
        out.append(GridForm(gf.eta1 / norm, gf.eta2 / norm, gf.deta / norm))
    return out


# ---------------------------------------------------------------------------
# exact correlations on the frequency lattice
# ---------------------------------------------------------------------------

def homotopy_action(m: ToralMap) -> IntegerMatrix:
    """Induced action on H^1 as integer winding numbers of the generator
    loops; equals the transpose of the linear part for every admissible
    perturbation size (the perturbation is periodic, so its lift contributes
    no net displacement)."""
    def lift(x):
        x = np.asarray(x, dtype=float)
        out = x @ m.L().T
        if m.eps:
            out = out + m.eps * m.perturbation.value(x)
        return out

    windings = []
    for gen in ((1.0, 0.0), (0.0, 1.0)):
        disp = lift(np.asarray(gen)) - lift(np.zeros(2))
        w = [int(round(disp[0])), int(round(disp[1]))]
        if max(abs(disp[0] - w[0]), abs(disp[1] - w[1])) > 1e-9:
            raise AssertionError("generator winding is not integral")
        windings.append(w)
    # windings are images of generators in H_1; the H^1 action is its transpose
    return IntegerMatrix.from_rows([[windings[0][0], windings[1][0]],
                                    [windings[0][1], windings[1][1]]])


def exact_correlation(L: IntegerMatrix, f: TrigObservable, g: TrigObservable,
                      n: int) -> complex:
    """<f o A^n, g> with respect to Haar measure, exactly: the integer
    lattice pairs f-frequencies pushed n times by L^T against g-frequencies."""
    lt = L.transpose()
    g_conj = {k: v.conjugate() for k, v in g.coeffs}
    total = 0j
    for k, c in f.coeffs:
        vec = k
        for _ in range(n):
            vec = lt.apply(vec)
        total += c * g_conj.get(tuple(vec), 0j)
    return total


def vanishing_index(L: IntegerMatrix, f: TrigObservable, g: TrigObservable,
                    n_max: int = 400) -> int:
    """Smallest n0 with <f o A^n, g> = mean(f) mean(g) exactly for n > n0.

    Brute-forces the lattice orbits of the f-frequencies until each is
    certified outside the ball containing the g-support: the expanding
    component of an integer frequency is never zero, so |T^n k| grows at
    least like |a+| lambda^n / |w+|."""
    lt = L.transpose()
    lt_np = lt.to_numpy()
    w, v = np.linalg.eig(lt_np)
    iu = int(np.argmax(np.abs(w)))
    lam = float(np.real(w[iu]))
    dual = np.linalg.inv(v)
    w_plus = np.real(dual[iu, :])
    w_plus_norm = float(np.linalg.norm(w_plus))

    g_keys = {k for k, val in g.coeffs if val != 0 and k != (0, 0)}
    radius = max((math.hypot(*k) for k in g_keys), default=0.0)
    n0 = 0
    for k, c in f.coeffs:
        if c == 0 or k == (0, 0):
            continue
        a_plus = abs(float(np.dot(w_plus, k)))
        if a_plus < 1e-12:
            raise AssertionError("integer frequency with zero expanding part")
        vec = k
        n = 0
        while n < n_max:
            # certified: |vec| >= |a+| lam^n / |w+|
            if a_plus * abs(lam) ** n / w_plus_norm > radius:
                break
            if tuple(vec) in g_keys:
                n0 = max(n0, n)
            vec = lt.apply(vec)
            n += 1
        else:
            raise AssertionError("frequency orbit did not escape; increase n_max")
    return n0


# ---------------------------------------------------------------------------
# the unstable linear flow on the torus (deviation experiments)
# ---------------------------------------------------------------------------

def linear_flow_integral(L: IntegerMatrix, f: TrigObservable, x, T: float) -> float:
    """Exact Birkhoff integral of f along the unit-speed unstable linear flow
    of the hyperbolic matrix L from point x."""
    split = spectral_split(L)
    l_np = L.to_numpy()
    w, v = np.linalg.eig(l_np)
    i = int(np.argmax(np.abs(w)))
    direction = np.real(v[:, i])
    direction /= np.linalg.norm(direction)
    x = np.asarray(x, dtype=float)
    total = 0.0
    for (k1, k2), c in f.coeffs:
        if (k1, k2) == (0, 0):
            total += (c * T).real
            continue
        kv = TWO_PI * (k1 * direction[0] + k2 * direction[1])
        phase = TWO_PI * (k1 * x[0] + k2 * x[1])
        term = c * (np.exp(1j * (phase + kv * T)) - np.exp(1j * phase)) / (1j * kv)
        total += term.real
    return float(total)
