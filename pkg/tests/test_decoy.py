import math

import numpy as np
import pytest

from rfiqkd import intensity_triple
from rfiqkd.decoy import (
    BoundedCount,
    DecoyPreconditionError,
    error_count_bound,
    fluctuation_deltas,
    fluctuation_interval,
    single_photon_bound,
    single_photon_error_rate,
    tau,
    vacuum_bound,
)

TABLE = intensity_triple(0.55, 0.28, 0.0, 0.54, 0.36, 0.10)
EPS = 1e-10


def test_tau0_baseline_intensities():
    # 0.54*exp(-0.55) + 0.36*exp(-0.28) + 0.10
    assert tau(0, TABLE) == pytest.approx(0.683635044530, abs=1e-12)


def test_tau_pure_vacuum_source():
    pure = intensity_triple(0.0, 0.0, 0.0, 0.0, 0.0, 1.0)
    assert tau(0, pure) == pytest.approx(1.0)
    assert tau(1, pure) == 0.0


def test_tau_normalized_to_poisson_cap():
    total = sum(tau(n, TABLE) for n in range(40))
    assert total == pytest.approx(1.0, abs=1e-9)


def test_fluctuation_deltas_at_zero():
    b = math.log(1.0 / EPS)
    d_lo, d_up = fluctuation_deltas(0.0, EPS)
    assert d_lo == pytest.approx(b)
    assert d_up == pytest.approx(2 * b)


def test_fluctuation_deltas_at_1e6():
    d_lo, d_up = fluctuation_deltas(1e6, EPS)
    assert d_lo == pytest.approx(6797.66311591, abs=1e-2)
    assert d_up == pytest.approx(6809.20533940, abs=1e-2)


def test_fluctuation_interval_shape():
    iv = fluctuation_interval(1000.0, EPS)
    assert iv.lower < iv.point == 1000.0 < iv.upper
    small = fluctuation_interval(1.0, EPS)
    assert small.lower == 0.0 and small.clamped


def test_fluctuation_interval_literal_upper_is_vacuous():
    iv = fluctuation_interval(1000.0, EPS, literal_upper=True)
    assert iv.upper < iv.point


def test_fluctuation_disabled_collapses_to_point():
    iv = fluctuation_interval(1234.0, None)
    assert iv.lower == iv.point == iv.upper == 1234.0


def test_fluctuation_monotone_in_eps():
    # Weaker confidence (bigger eps) must never widen the interval.
    widths = []
    for eps in (1e-12, 1e-9, 1e-6, 1e-3, 1e-1):
        iv = fluctuation_interval(5e4, eps)
        widths.append(iv.upper - iv.lower)
    assert all(a >= b for a, b in zip(widths, widths[1:]))


def test_fluctuation_coverage_binomial():
    # Empirical coverage against the known mean of Binomial(1e5, 0.3).
    rng = np.random.default_rng(7)
    draws = rng.binomial(100_000, 0.3, size=10_000)
    mean = 30_000.0
    misses = 0
    for x in draws:
        iv = fluctuation_interval(float(x), 1e-3)
        if not iv.lower <= mean <= iv.upper:
            misses += 1
    assert misses <= 20  # 99.8 percent coverage


def test_vacuum_bound_omega_zero_collapse():
    # With a true vacuum setting the bound reduces to tau0 * n_omega / p_omega.
    counts = (5000.0, 2000.0, 100.0)
    res = vacuum_bound(counts, TABLE, EPS)
    t0 = tau(0, TABLE)
    lo_expected = t0 * fluctuation_interval(100.0, EPS).lower / 0.10
    up_expected = t0 * fluctuation_interval(100.0, EPS).upper / 0.10
    assert res.lower == pytest.approx(lo_expected)
    assert res.upper == pytest.approx(up_expected)
    assert res.point == pytest.approx(t0 * 100.0 / 0.10)


def test_vacuum_bound_no_dark_counts():
    res = vacuum_bound((5000.0, 2000.0, 0.0), TABLE, EPS)
    assert res.lower == 0.0


def test_vacuum_bound_requires_nu_above_omega():
    flat = intensity_triple(0.55, 0.2, 0.2, 0.54, 0.36, 0.10)
    with pytest.raises(DecoyPreconditionError):
        vacuum_bound((1.0, 1.0, 1.0), flat, EPS)


def test_single_photon_bound_zero_counts():
    s0 = vacuum_bound((0.0, 0.0, 0.0), TABLE, EPS)
    res = single_photon_bound((0.0, 0.0, 0.0), s0, TABLE, EPS)
    assert res.lower == 0.0


def test_single_photon_bound_precondition():
    # mu * (nu - omega) = 0.069 < nu^2 - omega^2 = 0.0759
    tight = intensity_triple(0.3, 0.28, 0.05, 0.54, 0.36, 0.10)
    s0 = BoundedCount(0.0, 0.0, 0.0)
    with pytest.raises(DecoyPreconditionError):
        single_photon_bound((1.0, 1.0, 1.0), s0, tight, EPS)


def test_single_photon_scale_at_operating_point(ch):
    # Class-level Z counts at 200 km for a 3e12 block, taken before the
    # receiver basis split (the split ratio is not part of the baseline
    # parameter set); the reported operating point quotes 3.3e7.
    from rfiqkd.channel import transmittance
    from rfiqkd.core import BasisLabel

    eta = transmittance(200.0, BasisLabel.Z, ch)
    n_total = 3e12
    counts = []
    for k in TABLE:
        gain = 1 - (1 - ch.e_d) * math.exp(-eta * k.mean_photons)
        counts.append(n_total * 0.77 * k.probability * gain)
    s0 = vacuum_bound(tuple(counts), TABLE, EPS)
    s1 = single_photon_bound(tuple(counts), s0, TABLE, EPS)
    assert 3.3e7 / 2 <= s1.lower <= 3.3e7 * 2


def test_error_count_bound_zero_errors():
    res = error_count_bound((0.0, 0.0, 0.0), TABLE, EPS, cap=1e9)
    assert res.lower == 0.0
    assert 0.0 < res.upper < 1e4  # only fluctuation terms remain


def test_error_count_bound_bar_swap_symmetry():
    counts = (4000.0, 900.0, 40.0)
    res = error_count_bound(counts, TABLE, EPS, cap=1e9)
    t1 = tau(1, TABLE)
    iv_nu = fluctuation_interval(900.0, EPS)
    iv_om = fluctuation_interval(40.0, EPS)
    coef = t1 / 0.28
    lo = coef * (math.exp(0.28) * iv_nu.lower / 0.36 - iv_om.upper / 0.10)
    up = coef * (math.exp(0.28) * iv_nu.upper / 0.36 - iv_om.lower / 0.10)
    assert res.lower == pytest.approx(max(lo, 0.0))
    assert res.upper == pytest.approx(up)


def test_error_rate_from_bounds():
    e = single_photon_error_rate(
        BoundedCount(10.0, 15.0, 20.0), BoundedCount(100.0, 150.0, 200.0)
    )
    assert e.lower == pytest.approx(0.05)
    assert e.upper == pytest.approx(0.2)
    assert not e.degenerate


def test_error_rate_zero_numerator():
    e = single_photon_error_rate(
        BoundedCount(0.0, 1.0, 5.0), BoundedCount(10.0, 20.0, 30.0)
    )
    assert e.lower == 0.0


def test_error_rate_degenerate_denominator():
    e = single_photon_error_rate(
        BoundedCount(1.0, 2.0, 3.0), BoundedCount(0.0, 10.0, 20.0)
    )
    assert e.upper == 1.0
    assert e.degenerate


def test_bounds_scale_consistency():
    # Ten times the data shrinks the per-pulse interval width.
    counts = (50_000.0, 18_000.0, 900.0)
    scaled = tuple(10 * c for c in counts)
    s0_a = vacuum_bound(counts, TABLE, EPS)
    s0_b = vacuum_bound(scaled, TABLE, EPS)
    s1_a = single_photon_bound(counts, s0_a, TABLE, EPS)
    s1_b = single_photon_bound(scaled, s0_b, TABLE, EPS)
    assert s1_b.width / 10 < s1_a.width
    assert s0_b.width / 10 < s0_a.width


def test_disabled_fluctuations_give_point_estimates():
    counts = (50_000.0, 18_000.0, 900.0)
    s0 = vacuum_bound(counts, TABLE, None)
    assert s0.lower == s0.point == s0.upper
    s1 = single_photon_bound(counts, s0, TABLE, None)
    assert s1.lower == s1.point == s1.upper
    t = error_count_bound((500.0, 180.0, 4.0), TABLE, None, cap=1e9)
    assert t.lower == t.point == t.upper
