import math
import random
from fractions import Fraction

import numpy as np
import pytest

from ergodev.cohomology import IntegerMatrix, deviation_exponents, spectral_split
from ergodev.deviation import (
    DeviationReport,
    basic_current_check,
    coboundary_pair,
    combined_envelope_report,
    correlation_expansion_check,
    deviation_series,
    fit_power_law,
    peel_expansion,
)
from ergodev.errors import DegenerateWindow, ExponentCollision
from ergodev.presets import load_preset
from ergodev.suspension import (
    FlowPoint,
    UnstableCurve,
    constant_observable,
    flow_step,
    suspension_of,
)
from ergodev.torus import TrigObservable, make_toral_map, random_zero_mean_trig

CAT = IntegerMatrix.from_rows([[2, 1], [1, 1]])


def _synthetic(T_values, values):
    devs = tuple(values)
    env = []
    run = 0.0
    for d in devs:
        run = max(run, abs(d))
        env.append(run)
    return DeviationReport(T_values=tuple(T_values), birkhoff=devs,
                          deviations=devs, envelope=tuple(env),
                          mean_value=0.0, start=(0.0,), peeled={})


def test_fit_power_law_exact_synthetic():
    ts = list(np.exp(np.linspace(math.log(10), math.log(1e7), 60)))
    rep = _synthetic(ts, [t ** 0.7 for t in ts])
    slope, intercept, stderr = fit_power_law(rep, (10, 1e7))
    assert slope == pytest.approx(0.7, abs=1e-6)
    assert abs(intercept) < 1e-9


def test_fit_power_law_polylog_flat():
    ts = list(np.exp(np.linspace(math.log(1e2), math.log(1e7), 80)))
    rep = _synthetic(ts, [math.log(t) ** 2 for t in ts])
    slope, _, _ = fit_power_law(rep, (1e4, 1e7))
    assert slope <= 0.2  # slope of a polylog shrinks with the window
    rep2 = _synthetic(ts, [math.log(t) ** 2 for t in ts])
    slope2, _, _ = fit_power_law(rep2, (1e5, 1e7))
    assert slope2 < slope + 1e-12


def test_fit_power_law_degenerate_window():
    ts = [10.0, 20.0, 40.0]
    rep = _synthetic(ts, [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateWindow):
        fit_power_law(rep, (10, 40))


def test_deviation_series_constant_observable_zero():
    m, _ = load_preset("genus2_a")
    one = constant_observable(m)
    x = m.field.from_rational(Fraction(17, 97))
    grid = list(np.exp(np.linspace(math.log(10), math.log(1e4), 20)))
    rep = deviation_series(m, one, x, grid)
    assert max(abs(d) for d in rep.deviations) < 1e-7


def test_deviation_series_envelope_monotone():
    m, f = load_preset("genus2_a")
    x = m.field.from_rational(Fraction(17, 97))
    grid = list(np.exp(np.linspace(math.log(10), math.log(1e4), 25)))
    rep = deviation_series(m, f, x, grid)
    assert list(rep.envelope) == sorted(rep.envelope)


def test_coboundary_deviation_bounded():
    """f = Xg has E_T = g(end) - g(start): bounded by 2 sup|g|."""
    m, _ = load_preset("genus2_a")
    g, dg = coboundary_pair(m, seed=11)
    assert abs(dg.mean()) < 1e-12
    x = m.field.from_rational(Fraction(31, 127))
    susp = suspension_of(m)
    sup_g = sum(abs(t.coeff) for t in g.terms)
    grid = list(np.exp(np.linspace(math.log(10), math.log(1e4), 20)))
    rep = deviation_series(m, dg, x, grid)
    for T, e in zip(rep.T_values, rep.deviations):
        end = flow_step(m, FlowPoint(x, m.field.zero), m.field.from_rational(
            Fraction(int(T * 2 ** 20), 2 ** 20)))
        lab_end = susp.locate(end.x)
        lab0 = susp.locate(x)
        predicted = g.value(lab_end, float(end.x), float(end.y)) - g.value(lab0, float(x), 0.0)
        assert e == pytest.approx(predicted, abs=1e-5)
        assert abs(e) <= 2 * sup_g + 1e-6


def test_peel_synthetic_single_exponent():
    ts = list(np.exp(np.linspace(math.log(1e2), math.log(1e7), 60)))
    rep = _synthetic(ts, [3.0 * t ** 0.7 for t in ts])
    table = deviation_exponents(spectral_split(IntegerMatrix.from_rows(
        [[0, 0, 0, -1], [1, 0, 0, 7], [0, 1, 0, -13], [0, 0, 1, 7]])))
    # replace the secondary exponent with the synthetic 0.7 via a fake table
    from ergodev.cohomology import ExponentRow, ExponentTable
    table = ExponentTable(rows=(ExponentRow(1, 1.0, 1), ExponentRow(2, 0.7, 1)))
    out = peel_expansion(rep, table)
    coeffs = np.array(out.peeled[(2, 1)])
    assert np.allclose(coeffs, 3.0, atol=1e-3)
    assert out.coefficients_bounded
    assert out.recurrent_windows >= 10
    assert out.recurrent_floor == pytest.approx(3.0, rel=1e-3)


def test_peel_no_secondary_is_noop():
    ts = list(np.exp(np.linspace(math.log(1e2), math.log(1e6), 40)))
    rep = _synthetic(ts, [math.sin(t) for t in ts])
    table = deviation_exponents(spectral_split(CAT))  # k = 1: nothing to peel
    out = peel_expansion(rep, table)
    assert out.peeled == {}
    assert out.coefficients_bounded is None


def test_peel_exponent_collision():
    from ergodev.cohomology import ExponentRow, ExponentTable
    ts = [10.0 * 2 ** k for k in range(15)]
    rep = _synthetic(ts, [1.0] * 15)
    table = ExponentTable(rows=(ExponentRow(1, 1.0, 1),
                                ExponentRow(2, 0.5 + 1e-9, 1),
                                ExponentRow(3, 0.5, 1)))
    with pytest.raises(ExponentCollision):
        peel_expansion(rep, table)


def test_basic_current_check_suspension():
    m, f = load_preset("genus2_a")
    battery = [f]
    x = m.field.from_rational(Fraction(5, 113))
    curves = [UnstableCurve(FlowPoint(x, m.field.zero),
                            m.field.from_rational(Fraction(1000)))]
    rows = basic_current_check(m, battery, curves)
    assert all(r.tangency_residual == 0.0 for r in rows)


def test_basic_current_check_torus():
    lin = make_toral_map(CAT)
    rng = random.Random(3)
    battery = [random_zero_mean_trig(rng, 3) for _ in range(5)]
    pts = [((rng.random(), rng.random()), rng.uniform(1, 100)) for _ in range(10)]
    rows = basic_current_check(lin, battery, pts)
    assert all(r.tangency_residual == 0.0 for r in rows)


def test_correlation_check_constants():
    one = TrigObservable.from_dict({(0, 0): 1.0})
    rep = correlation_expansion_check(CAT, one, one, 10)
    assert all(r.residual == 0.0 for r in rep.rows)
    assert rep.middle_sum_empty
    assert rep.polylog_exponent == 2  # J0 = 0 for the cat map


def test_correlation_check_zero_mean_pairs():
    rng = random.Random(4)
    for _ in range(4):
        f = random_zero_mean_trig(rng, 5)
        g = random_zero_mean_trig(rng, 5)
        rep = correlation_expansion_check(CAT, f, g, 40)
        bound = f.l1_norm() * g.l1_norm()
        for r in rep.rows:
            if r.n > rep.n0:
                assert r.residual == 0.0
            else:
                assert r.residual <= bound + 1e-12


def test_deviation_series_resamples_on_singular_start():
    m, f = load_preset("genus2_a")
    susp = suspension_of(m)
    # exact division point: the first roof application hits the cone point
    x = susp.starts[m.combinatorics.top[1]]
    grid = [10.0, 20.0, 40.0]
    rep = deviation_series(m, f, x, grid)
    assert rep.diagnostics.get("resampled", 0) >= 1
    assert len(rep.deviations) == 3


def test_basicness_reports_computed_peel():
    m, f = load_preset("genus2_a")
    x = m.field.from_rational(Fraction(5, 113))
    curves = [UnstableCurve(FlowPoint(x, m.field.zero),
                            m.field.from_rational(Fraction(500)))]
    rows = basic_current_check(m, [f], curves)
    assert rows[0].tangency_residual == 0.0
    assert rows[0].peeled_sup == 0.0  # zero integrand peels to zero exactly


def test_birkhoff_average_converges_to_mean():
    m, f = load_preset("genus2_a")
    from ergodev.suspension import birkhoff_integral, mean
    x = m.field.from_rational(Fraction(7, 311))
    mu = mean(m, f)
    errs = [abs(birkhoff_integral(m, f, x, T) / T - mu) for T in (1e2, 1e4, 1e6)]
    assert errs[2] < errs[0] / 50


def test_combined_envelope_report():
    ts = [1.0, 2.0, 4.0]
    r1 = _synthetic(ts, [1.0, -3.0, 2.0])
    r2 = _synthetic(ts, [-2.0, 1.0, 1.0])
    comb = combined_envelope_report([r1, r2])
    assert comb.deviations == (2.0, 3.0, 2.0)
    assert comb.envelope == (2.0, 3.0, 3.0)
