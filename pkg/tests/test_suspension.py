import random
from fractions import Fraction

import mpmath
import pytest

from ergodev.errors import HitSingularity
from ergodev.presets import load_preset
from ergodev.suspension import (
    CellObservable,
    FlowPoint,
    ProfileTerm,
    UnstableCurve,
    apply_pa,
    birkhoff_integral,
    constant_observable,
    flow_step,
    mean,
    naive_birkhoff_integral,
    seeded_observable,
    suspension_of,
    tower_table,
)


@pytest.fixture(scope="module")
def golden():
    return load_preset("golden")


@pytest.fixture(scope="module")
def genus2():
    return load_preset("genus2_a")


def _pt(model, num, den):
    return FlowPoint(model.field.from_rational(Fraction(num, den)), model.field.zero)


def test_flow_zero_duration_is_identity(golden):
    m, _ = golden
    p = _pt(m, 2, 7)
    q = flow_step(m, p, m.field.zero)
    assert q.x == p.x and q.y == p.y


def test_flow_full_roof_lands_at_iet_image(golden):
    m, _ = golden
    susp = suspension_of(m)
    x = m.field.from_rational(Fraction(2, 7))
    lab = susp.locate(x)
    q = flow_step(m, FlowPoint(x, m.field.zero), m.heights[lab])
    assert q.y.is_zero()
    assert q.x == x + susp.translations[lab]


def test_flow_semigroup_exact(golden):
    m, _ = golden
    rng = random.Random(4)
    for _ in range(200):
        p = _pt(m, rng.randrange(1, 997), 997)
        s = m.field.from_rational(Fraction(rng.randrange(1, 50), 7))
        t = m.field.from_rational(Fraction(rng.randrange(1, 50), 11))
        a = flow_step(m, flow_step(m, p, s), t)
        b = flow_step(m, p, s + t)
        assert a.x == b.x and a.y == b.y


def test_flow_semigroup_mpf_fallback(golden):
    m, _ = golden
    p = FlowPoint(mpmath.mpf("0.3141592653589793238462643383"), mpmath.mpf(0))
    s, t = mpmath.mpf("5.25"), mpmath.mpf("2.125")
    a = flow_step(m, flow_step(m, p, s), t)
    b = flow_step(m, p, s + t)
    assert abs(float(a.x - b.x)) < 1e-12
    assert abs(float(a.y - b.y)) < 1e-12


def test_hit_singularity_exact(golden):
    m, _ = golden
    susp = suspension_of(m)
    # start exactly below a division point's preimage: T(x) == division point
    x = susp.ends[m.combinatorics.top[0]] - susp.translations[m.combinatorics.top[0]]
    lab = susp.locate(x)
    assert x + susp.translations[lab] == susp.ends[m.combinatorics.top[0]]
    with pytest.raises(HitSingularity):
        flow_step(m, FlowPoint(x, m.field.zero),
                  m.heights[lab] + m.field.from_rational(Fraction(1, 100)))


def test_birkhoff_constant_is_duration(genus2):
    m, _ = genus2
    one = constant_observable(m)
    x = m.field.from_rational(Fraction(13, 64))
    for T in (0.0, 1.0, 517.25, 10000.0):
        assert birkhoff_integral(m, one, x, T) == pytest.approx(T, rel=1e-12, abs=1e-12)


def test_birkhoff_zero_time(genus2):
    m, f = genus2
    x = m.field.from_rational(Fraction(13, 64))
    assert birkhoff_integral(m, f, x, 0.0) == 0.0


@pytest.mark.parametrize("preset", ["golden", "genus2_a"])
def test_birkhoff_matches_naive_oracle(preset):
    m, f = load_preset(preset)
    rng = random.Random(17)
    for _ in range(12):
        x = m.field.from_rational(Fraction(rng.randrange(1, 10 ** 6), 10 ** 6))
        T = rng.uniform(1.0, 2000.0)
        accel = birkhoff_integral(m, f, x, T)
        naive = naive_birkhoff_integral(m, f, x, T)
        assert accel == pytest.approx(naive, rel=1e-9, abs=1e-9)


def test_birkhoff_midcell_start(genus2):
    m, f = genus2
    x = m.field.from_rational(Fraction(13, 64))
    susp = suspension_of(m)
    lab = susp.locate(x)
    y = m.heights[lab] / 3
    p = FlowPoint(x, y)
    accel = birkhoff_integral(m, f, p, 777.7)
    naive = naive_birkhoff_integral(m, f, p, 777.7)
    assert accel == pytest.approx(naive, rel=1e-9, abs=1e-9)


def test_mean_constant_normalized(genus2):
    m, _ = genus2
    assert mean(m, constant_observable(m)) == pytest.approx(1.0, abs=1e-12)


def test_mean_odd_vertical_profile_vanishes(genus2):
    m, _ = genus2
    # vertical profile cos(2 pi (y - h/2) / h) integrates to zero over [0, h]
    import math
    terms = []
    for cell in range(m.d):
        h = float(m.heights[cell])
        terms.append(ProfileTerm(cell, 1.0, ("poly", 0),
                                 ("cos", 2 * math.pi / h, -math.pi)))
    obs = CellObservable(m, terms)
    assert mean(m, obs) == pytest.approx(0.0, abs=1e-14)


def test_tower_consistency(genus2):
    """Depth k+1 special sums equal the chained depth-k sums along the
    first-return orbit (the B-weighted combination, realized dynamically)."""
    m, f = genus2
    table = tower_table(m, f)
    table.ensure_depth(5)
    susp = suspension_of(m)
    x = m.field.from_rational(Fraction(5, 10 ** 5))
    for k in (0, 1, 3):
        kk = k + 1
        assert susp.in_depth_base(x, kk)
        lab = susp.locate_depth(x, kk)
        direct = table.crossing(kk, lab, float(x))
        total = 0.0
        cur = x
        target = susp.heights[lab] * susp.lam_pow(kk)
        accum = m.field.zero
        while accum != target:
            lab_k = susp.locate_depth(cur, k)
            total += table.crossing(k, lab_k, float(cur))
            accum = accum + susp.heights[lab_k] * susp.lam_pow(k)
            cur = susp.iet_apply_depth(cur, k)
        assert direct == pytest.approx(total, rel=1e-12, abs=1e-12)


def test_apply_pa_scales_duration(genus2):
    m, _ = genus2
    x = m.field.from_rational(Fraction(3, 31))
    cur = UnstableCurve(FlowPoint(x, m.field.zero),
                        m.field.from_rational(Fraction(7, 2)))
    img = apply_pa(m, cur, 2)
    assert img.duration == cur.duration * m.field.gen_power(2)
    assert img.start.x == x * m.field.gen_power(-2)


def test_seeded_observable_zero_mean(genus2):
    m, _ = genus2
    obs = seeded_observable(m, seed=123)
    assert abs(obs.mean()) < 1e-12


def test_observable_json_roundtrip(genus2):
    m, f = genus2
    data = f.to_json()
    g = CellObservable.from_json(m, data)
    assert g.to_json() == data
    assert g.crossing(0, 0.1) == f.crossing(0, 0.1)
