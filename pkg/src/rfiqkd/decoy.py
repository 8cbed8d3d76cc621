"""Finite-size decoy-state estimation with closed-form two-decoy bounds.

All estimators work on the counts of one event class (for example "Z states
detected in the Z basis") split by source intensity. Statistical
fluctuations of each observed count are absorbed first, then the
closed-form vacuum / single-photon expressions are evaluated with the
worst-case ends of those intervals.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import exp, factorial, log, sqrt

from .core import IntensityClass


class DecoyPreconditionError(ValueError):
    """The intensity settings do not admit the closed-form bounds."""


class NonPhysicalEstimateError(ValueError):
    """An estimated interval came out with lower > upper after clamping."""


@dataclass(frozen=True)
class BoundedCount:
    """An estimated quantity with lower/upper bounds around a point value."""

    lower: float
    point: float
    upper: float
    clamped: bool = False
    degenerate: bool = False

    @property
    def width(self) -> float:
        return self.upper - self.lower


def tau(n: int, intensities: tuple[IntensityClass, ...]) -> float:
    """Probability that a pulse (any intensity setting) carries n photons."""
    if n < 0:
        raise ValueError(f"photon number must be >= 0, got {n}")
    acc = 0.0
    for k in intensities:
        acc += exp(-k.mean_photons) * k.mean_photons**n * k.probability
    return acc / factorial(n)


def fluctuation_deltas(x: float, eps: float | None) -> tuple[float, float]:
    """Downward and upward deviations of an observed count from its mean.

    ``eps`` is the probability that the mean escapes on either side.
    ``None`` disables fluctuations entirely (both deltas zero).
    """
    if eps is None:
        return 0.0, 0.0
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    if x < 0:
        raise ValueError(f"observed count must be >= 0, got {x}")
    b = log(1.0 / eps)
    delta_lower = b / 2.0 + sqrt(2.0 * b * x + b * b / 4.0)
    delta_upper = b + sqrt(2.0 * b * x + b * b)
    return delta_lower, delta_upper


def fluctuation_interval(
    x: float, eps: float | None, literal_upper: bool = False
) -> BoundedCount:
    """Interval that contains the mean of an observed count.

    ``literal_upper`` subtracts the upward deviation instead of adding it,
    which produces an upper end below the observation. That variant exists
    only for side-by-side comparison; it is vacuous as a bound.
    """
    delta_lower, delta_upper = fluctuation_deltas(x, eps)
    lower = x - delta_lower
    clamped = False
    if lower < 0.0:
        lower = 0.0
        clamped = True
    upper = x - delta_upper if literal_upper else x + delta_upper
    return BoundedCount(lower, x, upper, clamped=clamped)


def _ordered(name: str, lower: float, upper: float) -> None:
    if lower > upper:
        raise NonPhysicalEstimateError(
            f"{name}: estimated lower bound {lower!r} exceeds upper bound {upper!r}"
        )


def _clamp(value: float, lo: float, hi: float) -> tuple[float, bool]:
    if value < lo:
        return lo, True
    if value > hi:
        return hi, True
    return value, False


def vacuum_bound(
    counts: tuple[float, float, float],
    intensities: tuple[IntensityClass, IntensityClass, IntensityClass],
    eps: float | None,
    total: float | None = None,
    literal_upper: bool = False,
) -> BoundedCount:
    """Bounds on the number of detections caused by vacuum pulses.

    ``counts`` are the detections of one event class at (signal, decoy,
    vacuum) intensity. The result is clamped to [0, total detections].
    """
    mu_s, nu_s, om_s = intensities
    nu, om = nu_s.mean_photons, om_s.mean_photons
    if not nu > om:
        raise DecoyPreconditionError(f"need nu > omega, got nu={nu} omega={om}")
    n_mu, n_nu, n_om = counts
    if total is None:
        total = n_mu + n_nu + n_om

    iv_nu = fluctuation_interval(n_nu, eps, literal_upper)
    iv_om = fluctuation_interval(n_om, eps, literal_upper)
    t0 = tau(0, intensities)
    coef = t0 / (nu - om)

    def estimate(n_om_star: float, n_nu_star: float) -> float:
        return coef * (
            nu * exp(om) * n_om_star / om_s.probability
            - om * exp(nu) * n_nu_star / nu_s.probability
        )

    raw_lower = estimate(iv_om.lower, iv_nu.upper)
    raw_point = estimate(n_om, n_nu)
    raw_upper = estimate(iv_om.upper, iv_nu.lower)
    lower, cl = _clamp(raw_lower, 0.0, total)
    upper, cu = _clamp(raw_upper, 0.0, total)
    _ordered("vacuum count", lower, upper)
    return BoundedCount(lower, raw_point, upper, clamped=cl or cu)


def single_photon_bound(
    counts: tuple[float, float, float],
    s0: BoundedCount,
    intensities: tuple[IntensityClass, IntensityClass, IntensityClass],
    eps: float | None,
    total: float | None = None,
    literal_upper: bool = False,
) -> BoundedCount:
    """Bounds on the number of detections caused by single-photon pulses."""
    mu_s, nu_s, om_s = intensities
    mu, nu, om = mu_s.mean_photons, nu_s.mean_photons, om_s.mean_photons
    denom = mu * (nu - om) - (nu * nu - om * om)
    if denom <= 0.0:
        raise DecoyPreconditionError(
            f"need mu*(nu-omega) > nu^2-omega^2, got mu={mu} nu={nu} omega={om}"
        )
    n_mu, n_nu, n_om = counts
    if total is None:
        total = n_mu + n_nu + n_om

    iv_mu = fluctuation_interval(n_mu, eps, literal_upper)
    iv_nu = fluctuation_interval(n_nu, eps, literal_upper)
    iv_om = fluctuation_interval(n_om, eps, literal_upper)
    t0 = tau(0, intensities)
    t1 = tau(1, intensities)
    coef = mu * t1 / denom
    ratio = (nu * nu - om * om) / (mu * mu)

    def estimate(n_nu_star: float, n_om_star: float, s0_star: float, n_mu_star: float) -> float:
        return coef * (
            exp(nu) * n_nu_star / nu_s.probability
            - exp(om) * n_om_star / om_s.probability
            + ratio * (s0_star / t0 - exp(mu) * n_mu_star / mu_s.probability)
        )

    raw_lower = estimate(iv_nu.lower, iv_om.upper, s0.lower, iv_mu.upper)
    raw_point = estimate(n_nu, n_om, s0.point, n_mu)
    raw_upper = estimate(iv_nu.upper, iv_om.lower, s0.upper, iv_mu.lower)
    lower, cl = _clamp(raw_lower, 0.0, total)
    upper, cu = _clamp(raw_upper, 0.0, total)
    _ordered("single-photon count", lower, upper)
    return BoundedCount(lower, raw_point, upper, clamped=cl or cu)


def error_count_bound(
    error_counts: tuple[float, float, float],
    intensities: tuple[IntensityClass, IntensityClass, IntensityClass],
    eps: float | None,
    cap: float | None = None,
    literal_upper: bool = False,
) -> BoundedCount:
    """Bounds on the number of single-photon errors of one event class.

    ``cap`` is the physical ceiling (total observed errors of the class by
    default; single-photon errors cannot exceed it).
    """
    mu_s, nu_s, om_s = intensities
    nu, om = nu_s.mean_photons, om_s.mean_photons
    if not nu > om:
        raise DecoyPreconditionError(f"need nu > omega, got nu={nu} omega={om}")
    m_mu, m_nu, m_om = error_counts
    if cap is None:
        cap = m_mu + m_nu + m_om

    iv_nu = fluctuation_interval(m_nu, eps, literal_upper)
    iv_om = fluctuation_interval(m_om, eps, literal_upper)
    t1 = tau(1, intensities)
    coef = t1 / (nu - om)

    def estimate(m_nu_star: float, m_om_star: float) -> float:
        return coef * (
            exp(nu) * m_nu_star / nu_s.probability
            - exp(om) * m_om_star / om_s.probability
        )

    raw_lower = estimate(iv_nu.lower, iv_om.upper)
    raw_point = estimate(m_nu, m_om)
    raw_upper = estimate(iv_nu.upper, iv_om.lower)
    lower, cl = _clamp(raw_lower, 0.0, cap)
    upper, cu = _clamp(raw_upper, 0.0, cap)
    _ordered("single-photon error count", lower, upper)
    return BoundedCount(lower, raw_point, upper, clamped=cl or cu)


def single_photon_error_rate(t: BoundedCount, s1: BoundedCount) -> BoundedCount:
    """Error rate of single-photon detections from count bounds.

    A vanishing single-photon lower bound forces the rate's upper end to 1
    and marks the result degenerate.
    """
    degenerate = False
    if s1.upper > 0.0:
        lower = t.lower / s1.upper
    else:
        lower = 0.0
        degenerate = True
    if s1.lower > 0.0:
        upper = t.upper / s1.lower
    else:
        upper = 1.0
        degenerate = True
    point = t.point / s1.point if s1.point > 0.0 else 0.5
    lower, cl = _clamp(lower, 0.0, 1.0)
    upper, cu = _clamp(upper, 0.0, 1.0)
    point, _ = _clamp(point, 0.0, 1.0)
    return BoundedCount(lower, point, upper, clamped=cl or cu, degenerate=degenerate)
