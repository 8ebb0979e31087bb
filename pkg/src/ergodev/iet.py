"""Interval exchange transformations and linear pseudo-Anosov models.

A model is the fixed point of a closed, primitive Rauzy-Veech loop: lengths
are the Perron eigenvector of the loop matrix carried exactly in the number
field of the expansion factor, heights the left Perron eigenvector, and one
full loop of induction steps contracts the lengths by exactly 1/lambda.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cohomology import (
    ExponentTable,
    IntegerMatrix,
    SpectralSplit,
    deviation_exponents,
    spectral_split,
)
from .errors import (
    LoopNotClosed,
    NotPrimitive,
    PerronRootNotSimple,
    TieBreakUndefined,
    WrongSide,
)
from .exactpoly import charpoly_int, is_primitive, roots_of_int_poly
from .numberfield import FieldElement, NumberField

TOP = "t"
BOTTOM = "b"


@dataclass(frozen=True)
class IetCombinatorics:
    """Labeled permutation pair; labels are 0..d-1."""

    top: tuple[int, ...]
    bottom: tuple[int, ...]

    def __post_init__(self):
        d = len(self.top)
        if sorted(self.top) != list(range(d)) or sorted(self.bottom) != list(range(d)):
            raise ValueError("top/bottom must be permutations of the same labels")
        if not self.is_irreducible():
            raise ValueError("combinatorics is reducible")

    @property
    def d(self) -> int:
        return len(self.top)

    def is_irreducible(self) -> bool:
        seen_top: set[int] = set()
        seen_bot: set[int] = set()
        for k in range(self.d - 1):
            seen_top.add(self.top[k])
            seen_bot.add(self.bottom[k])
            if seen_top == seen_bot:
                return False
        return True

    def as_word(self) -> str:
        t = " ".join(str(x) for x in self.top)
        b = " ".join(str(x) for x in self.bottom)
        return f"{t} / {b}"


def _reinsert_after(row: tuple[int, ...], member: int, winner: int) -> tuple[int, ...]:
    out = [x for x in row if x != member]
    out.insert(out.index(winner) + 1, member)
    return tuple(out)


def rauzy_move(c: IetCombinatorics, side: str) -> tuple[IetCombinatorics, int, int]:
    """Combinatorial Rauzy move; returns (new combinatorics, winner, loser)."""
    if side == TOP:
        winner, loser = c.top[-1], c.bottom[-1]
        if winner == loser:
            raise WrongSide("degenerate move: identical last letters")
        new = IetCombinatorics(c.top, _reinsert_after(c.bottom, loser, winner))
    elif side == BOTTOM:
        winner, loser = c.bottom[-1], c.top[-1]
        if winner == loser:
            raise WrongSide("degenerate move: identical last letters")
        new = IetCombinatorics(_reinsert_after(c.top, loser, winner), c.bottom)
    else:
        raise ValueError(f"side must be '{TOP}' or '{BOTTOM}'")
    return new, winner, loser


def elementary_matrix(d: int, winner: int, loser: int) -> IntegerMatrix:
    """E = I + E_{winner,loser}; satisfies lengths_old = E @ lengths_new."""
    rows = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    rows[winner][loser] += 1
    return IntegerMatrix.from_rows(rows)


def rauzy_step(c: IetCombinatorics, lengths, side: str):
    """One Rauzy-Veech induction step with exact lengths.

    lengths is indexed by label.  The requested side must be the admissible
    one (winner strictly longer); equal lengths raise TieBreakUndefined.
    Returns (new combinatorics, new lengths, elementary matrix).
    """
    new_c, winner, loser = rauzy_move(c, side)
    lw, ll = lengths[winner], lengths[loser]
    if lw == ll:
        raise TieBreakUndefined("winner and loser lengths are equal")
    if lw < ll:
        raise WrongSide(f"side '{side}' is not admissible (winner shorter)")
    new_lengths = tuple(
        (x - ll) if lab == winner else x for lab, x in enumerate(lengths)
    )
    return new_c, new_lengths, elementary_matrix(c.d, winner, loser)


def admissible_side(c: IetCombinatorics, lengths) -> str:
    """Side dictated by the length comparison of the two last letters."""
    lt, lb = lengths[c.top[-1]], lengths[c.bottom[-1]]
    if lt == lb:
        raise TieBreakUndefined("equal last lengths: no admissible side")
    return TOP if lt > lb else BOTTOM


def loop_matrix(c: IetCombinatorics, word: str) -> tuple[IntegerMatrix, IetCombinatorics]:
    """Product of elementary matrices along a move word (combinatorial only)."""
    cur = c
    d = c.d
    prod = IntegerMatrix.from_rows([[1 if i == j else 0 for j in range(d)] for i in range(d)])
    for side in word:
        cur, winner, loser = rauzy_move(cur, side)
        prod = prod @ elementary_matrix(d, winner, loser)
    return prod, cur


# ---------------------------------------------------------------------------
# surface invariants
# ---------------------------------------------------------------------------

def intersection_form(c: IetCombinatorics) -> tuple[tuple[int, ...], ...]:
    """Skew matrix Omega with Omega[a][b] = +1 when a precedes b on top and
    follows it on the bottom; its rank equals twice the genus."""
    d = c.d
    pt = {lab: i for i, lab in enumerate(c.top)}
    pb = {lab: i for i, lab in enumerate(c.bottom)}
    rows = []
    for a in range(d):
        row = []
        for b in range(d):
            if a == b:
                row.append(0)
            elif pt[a] < pt[b] and pb[a] > pb[b]:
                row.append(1)
            elif pt[a] > pt[b] and pb[a] < pb[b]:
                row.append(-1)
            else:
                row.append(0)
        rows.append(tuple(row))
    return tuple(rows)


def _rational_rank(rows) -> int:
    m = [[Fraction(x) for x in r] for r in rows]
    n = len(m)
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, n) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pv = m[rank][col]
        for i in range(rank + 1, n):
            if m[i][col] != 0:
                f = m[i][col] / pv
                m[i] = [m[i][j] - f * m[rank][j] for j in range(n)]
        rank += 1
    return rank


def genus_of(c: IetCombinatorics) -> int:
    return _rational_rank(intersection_form(c)) // 2


def singularity_data(c: IetCombinatorics) -> tuple[tuple[int, ...], int]:
    """Cone-point structure of the suspended translation surface.

    Returns (cone angle multiplicities, genus): each entry m means one cone
    point of total angle 2*pi*m.  Computed from the vertex identifications of
    the suspension polygon; cross-checked against the symplectic rank.
    """
    d = c.d
    pt = {lab: i + 1 for i, lab in enumerate(c.top)}      # 1-indexed edge pos
    pb = {lab: i + 1 for i, lab in enumerate(c.bottom)}
    # vertices: ("t", 0..d) and ("b", 0..d)
    parent: dict = {("t", j): ("t", j) for j in range(d + 1)}
    parent.update({("b", j): ("b", j) for j in range(d + 1)})

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    union(("t", 0), ("b", 0))
    union(("t", d), ("b", d))
    for lab in range(d):
        union(("t", pt[lab] - 1), ("b", pb[lab] - 1))
        union(("t", pt[lab]), ("b", pb[lab]))

    classes: dict = {}
    for j in range(1, d):
        classes.setdefault(find(("t", j)), 0)
    for key in list(parent):
        classes.setdefault(find(key), 0)
    for j in range(1, d):
        classes[find(("t", j))] += 1
    multiplicities = tuple(sorted(m for m in classes.values() if m > 0))
    g = genus_of(c)
    if sum(m - 1 for m in multiplicities) != 2 * g - 2:
        raise AssertionError("singularity cycle count inconsistent with genus")
    if len(multiplicities) != d + 1 - 2 * g:
        raise AssertionError("singularity count inconsistent with d = 2g + s - 1")
    return multiplicities, g


# ---------------------------------------------------------------------------
# pseudo-Anosov fixed points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LoopStage:
    """State before one induction step of the loop, with exact data."""

    comb: IetCombinatorics
    lengths: tuple
    side: str
    winner: int
    loser: int
    translations: tuple  # IET translation per label at this stage


def _positions_top(c: IetCombinatorics, lengths):
    pos = {}
    acc = None
    for lab in c.top:
        pos[lab] = acc if acc is not None else lengths[0] - lengths[0]
        acc = pos[lab] + lengths[lab]
    return pos


def _translations(c: IetCombinatorics, lengths):
    zero = lengths[0] - lengths[0]
    pos_t = {}
    acc = zero
    for lab in c.top:
        pos_t[lab] = acc
        acc = acc + lengths[lab]
    pos_b = {}
    acc = zero
    for lab in c.bottom:
        pos_b[lab] = acc
        acc = acc + lengths[lab]
    return tuple(pos_b[lab] - pos_t[lab] for lab in range(c.d))


def _solve_eigenvector(field: NumberField, b_rows, transpose: bool):
    """Exact kernel vector of (B - lambda I) over Q(lambda); lambda = field.gen."""
    d = len(b_rows)
    lam = field.gen
    m = [[field.from_rational(b_rows[j][i] if transpose else b_rows[i][j])
          - (lam if i == j else field.zero)
          for j in range(d)] for i in range(d)]
    # echelon with exact zero tests
    pivots = []
    row = 0
    for col in range(d):
        piv = next((i for i in range(row, d) if not m[i][col].is_zero()), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        pv = m[row][col]
        for i in range(row + 1, d):
            if not m[i][col].is_zero():
                f = m[i][col] / pv
                m[i] = [m[i][j] - f * m[row][j] for j in range(d)]
        pivots.append(col)
        row += 1
    free = [c for c in range(d) if c not in pivots]
    if len(free) != 1:
        raise PerronRootNotSimple(f"kernel dimension {len(free)} != 1")
    v = [field.zero] * d
    v[free[0]] = field.one
    for r in range(len(pivots) - 1, -1, -1):
        col = pivots[r]
        s = field.zero
        for j in range(col + 1, d):
            if not m[r][j].is_zero():
                s = s + m[r][j] * v[j]
        v[col] = -s / m[r][col]
    return v


@dataclass(frozen=True)
class PseudoAnosovModel:
    """Linear pseudo-Anosov presented by a periodic Rauzy-Veech loop."""

    combinatorics: IetCombinatorics
    loop: str
    B: IntegerMatrix
    field: NumberField
    lengths: tuple            # exact, sum = 1, indexed by label
    heights: tuple            # exact left Perron data, area = 1
    cone_angles: tuple[int, ...]
    genus: int
    split: SpectralSplit
    exponents: ExponentTable
    stages: tuple[LoopStage, ...]

    @property
    def d(self) -> int:
        return self.combinatorics.d

    @property
    def lam(self) -> FieldElement:
        return self.field.gen

    @property
    def lam_float(self) -> float:
        return self.field.root_float

    @property
    def h_top(self) -> float:
        return self.split.h_top

    @property
    def num_singularities(self) -> int:
        return len(self.cone_angles)

    def min_height(self) -> float:
        return min(float(h) for h in self.heights)

    def max_height(self) -> float:
        return max(float(h) for h in self.heights)

    def to_json(self) -> dict:
        return {
            "top": list(self.combinatorics.top),
            "bottom": list(self.combinatorics.bottom),
            "loop": self.loop,
            "matrix": [list(r) for r in self.B.entries],
            "lambda_minpoly": list(self.field.minpoly),
            "lambda": self.lam_float,
            "genus": self.genus,
            "cone_angle_multiples": list(self.cone_angles),
            "exponents": self.exponents.to_json(),
        }


def pa_from_loop(c: IetCombinatorics, loop: str) -> PseudoAnosovModel:
    """Build and verify the linear model fixed by a closed Rauzy loop.

    Raises LoopNotClosed / NotPrimitive / PerronRootNotSimple, and replays the
    loop in exact arithmetic to certify the renormalization identity
    lengths -> lengths / lambda before returning.
    """
    if not loop or any(s not in (TOP, BOTTOM) for s in loop):
        raise ValueError("loop must be a nonempty word over 't'/'b'")
    b, end = loop_matrix(c, loop)
    if end != c:
        raise LoopNotClosed(f"word '{loop}' ends at {end.as_word()}")
    if not is_primitive(b.entries):
        raise NotPrimitive("loop matrix has no positive power")

    cp = charpoly_int(b.entries)
    roots = roots_of_int_poly(cp)
    top_root = roots[0]
    if not top_root.is_real or top_root.real <= 1 or top_root.multiplicity != 1:
        raise PerronRootNotSimple("Perron root missing or not simple")
    if abs(roots[1].modulus - top_root.modulus) < 1e-12:
        raise PerronRootNotSimple("Perron modulus not strictly dominant")

    field = NumberField(list(top_root.minpoly), top_root.real)
    lengths = _solve_eigenvector(field, b.entries, transpose=False)
    total = lengths[0]
    for x in lengths[1:]:
        total = total + x
    lengths = tuple(x / total for x in lengths)
    if any(x.sign() <= 0 for x in lengths):
        lengths = tuple(-x for x in lengths)
    if any(x.sign() <= 0 for x in lengths):
        raise PerronRootNotSimple("Perron eigenvector is not positive")

    heights = _solve_eigenvector(field, b.entries, transpose=True)
    if any(x.sign() <= 0 for x in heights):
        heights = tuple(-x for x in heights)
    if any(x.sign() <= 0 for x in heights):
        raise PerronRootNotSimple("left Perron eigenvector is not positive")
    area = field.zero
    for l, h in zip(lengths, heights):
        area = area + l * h
    heights = tuple(h / area for h in heights)

    # Exact replay: sides must match the word and the final lengths must be
    # exactly lengths / lambda.
    stages = []
    cur_c, cur_l = c, lengths
    for side in loop:
        want = admissible_side(cur_c, cur_l)
        if want != side:
            raise WrongSide(f"loop word '{loop}' not admissible at fixed lengths")
        _, winner, loser = rauzy_move(cur_c, side)
        stages.append(
            LoopStage(comb=cur_c, lengths=cur_l, side=side, winner=winner,
                      loser=loser, translations=_translations(cur_c, cur_l))
        )
        cur_c, cur_l, _ = rauzy_step(cur_c, cur_l, side)
    if cur_c != c:
        raise LoopNotClosed("replay ended at a different combinatorics")
    lam = field.gen
    for a, bb in zip(cur_l, lengths):
        if a * lam != bb:
            raise AssertionError("renormalization identity failed in exact arithmetic")

    cone, genus = singularity_data(c)
    split = spectral_split(b)
    return PseudoAnosovModel(
        combinatorics=c,
        loop=loop,
        B=b,
        field=field,
        lengths=lengths,
        heights=heights,
        cone_angles=cone,
        genus=genus,
        split=split,
        exponents=deviation_exponents(split),
        stages=tuple(stages),
    )


def search_closed_loops(c: IetCombinatorics, max_len: int):
    """Closed walks in the Rauzy diagram through c, shortest first."""
    frontier = [("", c)]
    for _ in range(max_len):
        nxt = []
        for word, cur in frontier:
            for side in (TOP, BOTTOM):
                try:
                    new, _, _ = rauzy_move(cur, side)
                except WrongSide:
                    continue
                w = word + side
                if new == c:
                    yield w
                nxt.append((w, new))
        frontier = nxt


def find_pa_loop(
    c: IetCombinatorics,
    max_len: int = 12,
    require_second_expanding: bool = False,
    require_real_spectrum: bool = False,
):
    """First (shortest, 't'<'b' lexicographic) loop whose model satisfies the
    requested spectral conditions; None when the search space is exhausted."""
    for word in search_closed_loops(c, max_len):
        b, _ = loop_matrix(c, word)
        if not is_primitive(b.entries):
            continue
        roots = roots_of_int_poly(charpoly_int(b.entries))
        top_root = roots[0]
        if not top_root.is_real or top_root.real <= 1 or top_root.multiplicity != 1:
            continue
        mods = sorted((r.modulus for r in roots), reverse=True)
        if len(mods) > 1 and abs(mods[0] - mods[1]) < 1e-9:
            continue
        if require_real_spectrum and any(not r.is_real for r in roots):
            continue
        if require_second_expanding:
            expanding = [r for r in roots if r.modulus > 1 + 1e-9]
            if len(expanding) < 2:
                continue
        return word
    return None
