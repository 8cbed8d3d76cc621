"""Finite-key secret-key length, drift classification and group extraction.

``analyze_tallies`` is the complete estimator stack: it takes one block of
observed counts and produces a key-length report with every intermediate
bound recorded. ``group_and_extract`` applies it per drift group after
classifying time slices by their X-basis error statistics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ._entropy import binary_entropy
from .core import (
    BasisLabel,
    ChannelParams,
    IntensityKind,
    KeyRateReport,
    ObservedTallies,
    ProtocolConfig,
    SecurityParams,
    StateLabel,
    zero_tallies,
)
from . import channel, decoy, security

__all__ = [
    "binary_entropy",
    "KeyLength",
    "key_length",
    "RhoResult",
    "rho_classify",
    "DriftClassifier",
    "GroupBucket",
    "GroupedData",
    "group_slices",
    "BucketOutcome",
    "ExtractionResult",
    "group_and_extract",
    "analyze_tallies",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class KeyLength:
    """Clamped secret-key length together with the raw (signed) value."""

    length: float
    raw: float

    @property
    def negative(self) -> bool:
        return self.raw < 0.0


def key_length(
    s0: float,
    s1: float,
    i_e: float,
    n_zz: float,
    e_zz: float,
    sec: SecurityParams,
    n_total: int,
) -> KeyLength:
    """Secret-key length of one block, clamped at zero.

    ``s0`` and ``s1`` are the lower bounds on vacuum and single-photon
    detections in the key basis, ``i_e`` the leaked-information bound,
    ``n_zz``/``e_zz`` the sifted-key size and its error rate.
    """
    raw = (
        s0
        + s1 * (1.0 - i_e)
        - n_zz * sec.f_ec * binary_entropy(e_zz)
        - math.log2(2.0 / sec.eps_ec)
        - 2.0 * math.log2(2.0 / sec.eps_pa)
        - 7.0 * math.sqrt(n_zz * math.log2(2.0 / sec.eps_bar))
        - 30.0 * math.log2(n_total + 1.0)
    )
    return KeyLength(max(raw, 0.0), raw)


@dataclass(frozen=True)
class RhoResult:
    """Drift-classification angle with clamp/degeneracy diagnostics."""

    rho: float
    clamped: bool = False
    degenerate: bool = False


def rho_classify(
    e_xx: float,
    e_xy: float,
    eta: float,
    mu: float,
    e_d: float,
    e0: float,
    negated_exponent: bool = False,
) -> RhoResult:
    """Map one slice's X-basis error statistics to an angle in [0, 2*pi].

    ``e_xx`` is the observed signal-intensity error rate of the in-phase
    X cell, ``e_xy`` the quadrature statistic (Y0 prepared, X measured).
    ``eta`` is the X-path transmittance and ``mu`` the signal intensity.
    A degenerate result means the slice carries no usable phase
    information and belongs in the overflow group.
    """
    e_hat = (e_xx - e0) / (1.0 - e0)
    if e_hat <= 0.0:
        return RhoResult(0.0, degenerate=True)
    exponent = -eta * mu if negated_exponent else eta * mu
    radicand = (
        4.0 * math.exp(exponent) * e_xy * (1.0 - e_hat)
        + (1.0 - e_d) ** 2 * (1.0 - 2.0 * e_hat) ** 2
    )
    clamped = False
    if radicand < 0.0:
        radicand = 0.0
        clamped = True
    h_val = (1.0 - e_d) * (2.0 * e_hat - 1.0) + math.sqrt(radicand)
    if h_val <= 0.0:
        return RhoResult(0.0, clamped=clamped, degenerate=True)
    arg = (2.0 / (eta * mu)) * math.log(h_val / (2.0 * e_hat)) - 1.0
    if arg > 1.0:
        arg = 1.0
        clamped = True
    elif arg < -1.0:
        arg = -1.0
        clamped = True
    angle = math.acos(arg)
    rho = angle if e_xx < 0.5 else TWO_PI - angle
    return RhoResult(rho, clamped=clamped)


@dataclass(frozen=True)
class DriftClassifier:
    """Per-slice classifier bound to fixed receiver parameters."""

    eta: float  # X-path transmittance, detector efficiency included
    mu: float  # signal intensity
    e_d: float
    e0: float
    negated_exponent: bool = False

    @classmethod
    def from_channel(
        cls,
        ch: ChannelParams,
        cfg: ProtocolConfig,
        distance_km: float,
        negated_exponent: bool = False,
    ) -> "DriftClassifier":
        return cls(
            eta=channel.transmittance(distance_km, BasisLabel.X, ch),
            mu=cfg.intensity(IntensityKind.MU).mean_photons,
            e_d=ch.e_d,
            e0=ch.e0,
            negated_exponent=negated_exponent,
        )

    def classify(self, tallies: ObservedTallies) -> RhoResult:
        xx = tallies.cell(StateLabel.X0, BasisLabel.X, IntensityKind.MU)
        yx = tallies.cell(StateLabel.Y0, BasisLabel.X, IntensityKind.MU)
        if xx.detected == 0 or yx.detected == 0:
            return RhoResult(0.0, degenerate=True)
        return rho_classify(
            xx.errors / xx.detected,
            yx.errors / yx.detected,
            self.eta,
            self.mu,
            self.e_d,
            self.e0,
            negated_exponent=self.negated_exponent,
        )


@dataclass(frozen=True)
class GroupBucket:
    """One drift group: accumulated tallies plus the angle interval it covers."""

    index: int | None  # None marks the overflow group
    rho_low: float
    rho_high: float
    tallies: ObservedTallies
    n_slices: int
    n_pulses: int


@dataclass(frozen=True)
class GroupedData:
    buckets: tuple[GroupBucket, ...]

    def total_tallies(self) -> ObservedTallies:
        total = zero_tallies()
        for bucket in self.buckets:
            total = total + bucket.tallies
        return total


def group_slices(
    slices: list[ObservedTallies],
    m_groups: int,
    classifier: DriftClassifier | None,
) -> GroupedData:
    """Assign per-slice tallies to uniform angle groups.

    With one group, classification is skipped and everything is pooled,
    which makes the grouped pipeline identical to the ungrouped one.
    Degenerate slices land in a dedicated overflow group.
    """
    if m_groups < 1:
        raise ValueError(f"m_groups must be >= 1, got {m_groups}")
    if m_groups > 1 and classifier is None:
        raise ValueError("a classifier is required when m_groups > 1")
    acc = [zero_tallies() for _ in range(m_groups)]
    counts = [0] * m_groups
    overflow = zero_tallies()
    overflow_count = 0
    width = TWO_PI / m_groups

    for entry in slices:
        if m_groups == 1:
            idx = 0
        else:
            result = classifier.classify(entry)
            if result.degenerate:
                overflow = overflow + entry
                overflow_count += 1
                continue
            idx = min(int(result.rho / width), m_groups - 1)
        acc[idx] = acc[idx] + entry
        counts[idx] += 1

    def pulses(t: ObservedTallies) -> int:
        seen = {}
        for (state, basis, kind), cc in t.cells.items():
            seen[(state, kind)] = cc.sent
        return sum(seen.values())

    buckets = [
        GroupBucket(i, i * width, (i + 1) * width, acc[i], counts[i], pulses(acc[i]))
        for i in range(m_groups)
    ]
    if overflow_count:
        buckets.append(
            GroupBucket(None, 0.0, TWO_PI, overflow, overflow_count, pulses(overflow))
        )
    return GroupedData(tuple(buckets))


@dataclass(frozen=True)
class BucketOutcome:
    bucket: GroupBucket
    report: KeyRateReport | None
    key_length: float
    diagnostic: str | None = None


@dataclass(frozen=True)
class ExtractionResult:
    key_length: float
    outcomes: tuple[BucketOutcome, ...]
    grouped: GroupedData


# Event classes whose detection counts must be nonzero at signal and decoy
# intensity for a group to be analyzable at all.
_REQUIRED_CLASSES = (
    ((StateLabel.Z0, StateLabel.Z1), BasisLabel.Z),
    ((StateLabel.Z0,), BasisLabel.X),
    ((StateLabel.Z1,), BasisLabel.X),
    ((StateLabel.X0,), BasisLabel.X),
    ((StateLabel.Y0,), BasisLabel.X),
)


def _missing_cells(tallies: ObservedTallies) -> str | None:
    for states, basis in _REQUIRED_CLASSES:
        detected = tallies.class_detected(states, basis)
        for kind, value in zip((IntensityKind.MU, IntensityKind.NU), detected[:2]):
            if value == 0:
                names = "+".join(s.value for s in states)
                return f"no detections for ({names},{basis.value}) at {kind.value}"
    return None


def group_and_extract(
    slices: list[ObservedTallies],
    m_groups: int,
    cfg: ProtocolConfig,
    sec: SecurityParams,
    classifier: DriftClassifier | None = None,
    **analysis_options,
) -> ExtractionResult:
    """Classify slices, run the full pipeline per group, sum the key lengths.

    Groups with insufficient counts contribute zero length and carry a
    diagnostic instead of a report. Summation order is fixed by group
    index, so results do not depend on evaluation order.
    """
    grouped = group_slices(slices, m_groups, classifier)
    outcomes = []
    total = 0.0
    for bucket in grouped.buckets:
        if bucket.n_slices == 0:
            outcomes.append(BucketOutcome(bucket, None, 0.0, "empty group"))
            continue
        problem = _missing_cells(bucket.tallies)
        if problem is not None:
            outcomes.append(BucketOutcome(bucket, None, 0.0, problem))
            continue
        bucket_cfg = replace(cfg, n_total=max(bucket.n_pulses, 1))
        report = analyze_tallies(bucket.tallies, bucket_cfg, sec, **analysis_options)
        outcomes.append(BucketOutcome(bucket, report, report.key_length))
        total += report.key_length
    return ExtractionResult(total, tuple(outcomes), grouped)


def _class_bounds(
    tallies: ObservedTallies,
    states: tuple[StateLabel, ...],
    basis: BasisLabel,
    cfg: ProtocolConfig,
    eps: float | None,
    literal: bool,
) -> dict[str, decoy.BoundedCount]:
    """Vacuum, single-photon and error-count bounds for one event class."""
    detected = tallies.class_detected(states, basis)
    errors = tallies.class_errors(states, basis)
    s0 = decoy.vacuum_bound(detected, cfg.intensities, eps, literal_upper=literal)
    s1 = decoy.single_photon_bound(
        detected, s0, cfg.intensities, eps, literal_upper=literal
    )
    t = decoy.error_count_bound(errors, cfg.intensities, eps, literal_upper=literal)
    e = decoy.single_photon_error_rate(t, s1)
    return {"s0": s0, "s1": s1, "t": t, "e": e}


def analyze_tallies(
    tallies: ObservedTallies,
    cfg: ProtocolConfig,
    sec: SecurityParams,
    fluctuations: bool = True,
    finite_key_terms: bool = True,
    n_zz_all_intensities: bool = True,
    literal_paper_formulas: bool = False,
) -> KeyRateReport:
    """Run decoy estimation, channel-quality bounds and the key-length formula.

    ``fluctuations=False`` collapses every interval onto its point estimate
    and ``finite_key_terms=False`` drops the block-size penalty terms; the
    combination yields the asymptotic rate used as an upper reference.
    """
    eps = sec.eps_bar if fluctuations else None
    inter: dict[str, float] = {}

    def record(name: str, bound: decoy.BoundedCount) -> None:
        inter[f"{name}_lower"] = bound.lower
        inter[f"{name}_point"] = bound.point
        inter[f"{name}_upper"] = bound.upper
        if bound.clamped:
            inter[f"{name}_clamped"] = 1.0
        if bound.degenerate:
            inter[f"{name}_degenerate"] = 1.0

    zz = _class_bounds(
        tallies, (StateLabel.Z0, StateLabel.Z1), BasisLabel.Z, cfg, eps,
        literal_paper_formulas,
    )
    record("s0_zz", zz["s0"])
    record("s1_zz", zz["s1"])

    rates: dict[StateLabel, decoy.BoundedCount] = {}
    for state in (StateLabel.Z0, StateLabel.Z1, StateLabel.X0, StateLabel.Y0):
        cls = _class_bounds(
            tallies, (state,), BasisLabel.X, cfg, eps, literal_paper_formulas
        )
        tag = state.value.lower() + "x"
        record(f"s0_{tag}", cls["s0"])
        record(f"s1_{tag}", cls["s1"])
        record(f"t_{tag}", cls["t"])
        record(f"e_{tag}", cls["e"])
        rates[state] = cls["e"]

    cb = security.c_bounds(
        rates[StateLabel.Z0],
        rates[StateLabel.Z1],
        rates[StateLabel.X0],
        rates[StateLabel.Y0],
        literal_c1_lower=literal_paper_formulas,
    )
    inter["c1_lower"] = cb.c1_lower
    inter["c1_upper"] = cb.c1_upper
    inter["c2_lower"] = cb.c2_lower
    inter["c2_upper"] = cb.c2_upper
    if cb.clamped:
        inter["c44_clamped"] = 1.0
    i_e = security.ie_4state(cb.c44_lower)

    kinds = (
        (IntensityKind.MU, IntensityKind.NU, IntensityKind.OMEGA)
        if n_zz_all_intensities
        else (IntensityKind.MU,)
    )
    n_zz = sum(
        tallies.cell(s, BasisLabel.Z, k).detected
        for s in (StateLabel.Z0, StateLabel.Z1)
        for k in kinds
    )
    m_zz = sum(
        tallies.cell(s, BasisLabel.Z, k).errors
        for s in (StateLabel.Z0, StateLabel.Z1)
        for k in kinds
    )
    e_zz = m_zz / n_zz if n_zz > 0 else 0.0

    if finite_key_terms:
        kl = key_length(
            zz["s0"].lower, zz["s1"].lower, i_e, n_zz, e_zz, sec, cfg.n_total
        )
    else:
        raw = (
            zz["s0"].lower
            + zz["s1"].lower * (1.0 - i_e)
            - n_zz * sec.f_ec * binary_entropy(e_zz)
        )
        kl = KeyLength(max(raw, 0.0), raw)
    if kl.negative:
        inter["negative_length"] = 1.0
    inter["key_length_raw"] = kl.raw

    return KeyRateReport(
        s0_zz_lower=zz["s0"].lower,
        s1_zz_lower=zz["s1"].lower,
        c44_lower=cb.c44_lower,
        i_e=i_e,
        e_zz=e_zz,
        n_zz=n_zz,
        key_length=kl.length,
        key_rate=kl.length / cfg.n_total,
        intermediate=inter,
    )
