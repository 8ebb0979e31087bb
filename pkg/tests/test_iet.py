from fractions import Fraction

import pytest

from ergodev.errors import (
    LoopNotClosed,
    NotPrimitive,
    TieBreakUndefined,
    WrongSide,
)
from ergodev.iet import (
    IetCombinatorics,
    find_pa_loop,
    genus_of,
    loop_matrix,
    pa_from_loop,
    rauzy_step,
    singularity_data,
)
from ergodev.numberfield import NumberField

D2 = IetCombinatorics((0, 1), (1, 0))
D4 = IetCombinatorics((0, 1, 2, 3), (3, 2, 1, 0))


def _field_lengths(fracs):
    nf = NumberField([1, -3, 1], 2.618)
    return nf, tuple(nf.from_rational(Fraction(*f)) for f in fracs)


def test_rauzy_step_subtracts_loser():
    nf, lengths = _field_lengths([(5, 8), (3, 8)])
    # top last = 1 with length 3/8, bottom last = 0 with length 5/8: bottom wins
    new_c, new_l, e = rauzy_step(D2, lengths, "b")
    assert float(new_l[0]) == pytest.approx(5 / 8 - 3 / 8)
    assert float(new_l[1]) == pytest.approx(3 / 8)
    assert e.entries == ((1, 1), (0, 1))


def test_rauzy_step_conserves_total_minus_loser():
    nf, lengths = _field_lengths([(5, 8), (3, 8)])
    _, new_l, _ = rauzy_step(D2, lengths, "b")
    before = lengths[0] + lengths[1]
    after = new_l[0] + new_l[1]
    assert before - after == lengths[1]  # loser length removed


def test_rauzy_step_matrix_recovers_old_lengths():
    nf, lengths = _field_lengths([(5, 8), (3, 8)])
    _, new_l, e = rauzy_step(D2, lengths, "b")
    recovered = tuple(
        sum((nf.from_rational(e.entries[i][j]) * new_l[j] for j in range(2)),
            nf.zero)
        for i in range(2)
    )
    assert recovered == lengths


def test_rauzy_tie_rejected():
    nf, lengths = _field_lengths([(1, 2), (1, 2)])
    with pytest.raises(TieBreakUndefined):
        rauzy_step(D2, lengths, "t")


def test_rauzy_wrong_side_rejected():
    nf, lengths = _field_lengths([(5, 8), (3, 8)])
    with pytest.raises(WrongSide):
        rauzy_step(D2, lengths, "t")


def test_golden_model():
    m = pa_from_loop(D2, "tb")
    assert m.lam_float == pytest.approx((3 + 5 ** 0.5) / 2, abs=1e-14)
    assert m.genus == 1
    assert m.cone_angles == (1,)
    assert float(sum(m.lengths[1:], m.lengths[0])) == pytest.approx(1.0)
    area = sum((l * h for l, h in zip(m.lengths[1:], m.heights[1:])),
               m.lengths[0] * m.heights[0])
    assert area == m.field.one


def test_exact_renormalization_identity_golden():
    m = pa_from_loop(D2, "tb")
    cur_c, cur_l = m.combinatorics, m.lengths
    for side in m.loop:
        cur_c, cur_l, _ = rauzy_step(cur_c, cur_l, side)
    assert cur_c == m.combinatorics
    for new, old in zip(cur_l, m.lengths):
        assert new * m.lam == old  # exact identity in Q(lambda)


def test_genus2_model():
    m = pa_from_loop(D4, "ttbtbbtb")
    assert m.genus == 2
    assert m.cone_angles == (3,)  # one cone point of angle 6 pi
    assert m.B.is_unimodular()
    assert len(m.exponents.rows) == 2


def test_loop_not_closed():
    with pytest.raises(LoopNotClosed):
        pa_from_loop(D4, "t")


def test_not_primitive():
    # 'tb' on d=4 symmetric combinatorics closes but is far from primitive
    b, end = loop_matrix(D4, "tbtb")
    if end == D4:
        with pytest.raises(NotPrimitive):
            pa_from_loop(D4, "tbtb")


def test_singularity_data_known_strata():
    assert genus_of(D2) == 1
    assert singularity_data(D2) == ((1,), 1)
    assert singularity_data(D4) == ((3,), 2)
    d3 = IetCombinatorics((0, 1, 2), (2, 1, 0))
    assert singularity_data(d3) == ((1, 1), 1)
    d5 = IetCombinatorics((0, 1, 2, 3, 4), (4, 3, 2, 1, 0))
    assert singularity_data(d5) == ((2, 2), 2)


def test_find_pa_loop_matches_preset():
    w = find_pa_loop(D4, max_len=8, require_second_expanding=True,
                     require_real_spectrum=True)
    assert w == "ttbtbbtb"


def test_irreducibility_enforced():
    with pytest.raises(ValueError):
        IetCombinatorics((0, 1, 2), (1, 0, 2))


def test_iet_measure_preservation():
    """The interval exchange permutes its intervals: image intervals tile
    [0, 1) exactly, so total length is preserved."""
    from ergodev.iet import _translations

    for loop, c in (("tb", D2), ("ttbtbbtb", D4)):
        m = pa_from_loop(c, loop)
        tr = _translations(m.combinatorics, m.lengths)
        zero = m.field.zero
        starts = {}
        acc = zero
        for lab in m.combinatorics.top:
            starts[lab] = acc
            acc = acc + m.lengths[lab]
        images = sorted(((starts[lab] + tr[lab], m.lengths[lab])
                         for lab in range(m.d)), key=lambda p: float(p[0]))
        edge = zero
        for start, length in images:
            assert start == edge
            edge = edge + length
        assert edge == m.field.one
