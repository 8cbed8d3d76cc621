"""Shared domain types and configuration validation.

Everything here is an immutable value object. Instances are cheap to copy
with :func:`dataclasses.replace` and safe to share between workers.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

MAX_PULSES = 2**62  # counts are held in 64-bit integers

PROB_TOL = 1e-12


class StateLabel(enum.Enum):
    """States prepared at the transmitter. There is no X1 or Y1."""

    Z0 = "Z0"
    Z1 = "Z1"
    X0 = "X0"
    Y0 = "Y0"


class BasisLabel(enum.Enum):
    """Measurement bases at the receiver. There is no Y basis."""

    Z = "Z"
    X = "X"


class IntensityKind(enum.Enum):
    MU = "mu"  # signal
    NU = "nu"  # decoy
    OMEGA = "omega"  # vacuum


STATES = (StateLabel.Z0, StateLabel.Z1, StateLabel.X0, StateLabel.Y0)
BASES = (BasisLabel.Z, BasisLabel.X)
KINDS = (IntensityKind.MU, IntensityKind.NU, IntensityKind.OMEGA)

CellKey = tuple[StateLabel, BasisLabel, IntensityKind]

ALL_CELLS: tuple[CellKey, ...] = tuple(
    (s, b, k) for s in STATES for b in BASES for k in KINDS
)


@dataclass(frozen=True)
class IntensityClass:
    """One pulse-intensity setting: mean photon number and selection probability."""

    kind: IntensityKind
    mean_photons: float
    probability: float


@dataclass(frozen=True)
class ChannelParams:
    """Physical-layer constants of the fiber link and receiver."""

    e0: float = 0.01  # intrinsic error probability
    alpha_db_per_km: float = 0.19  # fiber loss
    eta_z_db: float = 4.0  # receiver Z-path loss
    eta_xy_db: float = 9.0  # receiver XY-path loss
    e_d: float = 1.3e-7  # dark-count probability per gate
    eta_det: float = 0.6  # detector efficiency
    beta: float = 0.0  # reference-frame rotation angle, radians


@dataclass(frozen=True)
class SecurityParams:
    """Failure-probability budget and error-correction efficiency."""

    eps_bar: float = 1e-10  # smooth min-entropy estimation accuracy
    eps_ec: float = 1e-10  # error-correction failure probability
    eps_pa: float = 1e-10  # privacy-amplification failure probability
    f_ec: float = 1.1  # error-correction efficiency (>= 1)


def intensity_triple(
    mu: float,
    nu: float,
    omega: float,
    p_mu: float,
    p_nu: float,
    p_omega: float,
) -> tuple[IntensityClass, IntensityClass, IntensityClass]:
    return (
        IntensityClass(IntensityKind.MU, mu, p_mu),
        IntensityClass(IntensityKind.NU, nu, p_nu),
        IntensityClass(IntensityKind.OMEGA, omega, p_omega),
    )


@dataclass(frozen=True)
class ProtocolConfig:
    """Source intensities, state/basis probabilities and block bookkeeping.

    ``p_x0`` and ``p_y0`` default to ``(1 - p_z_alice) / 2`` each.
    """

    intensities: tuple[IntensityClass, IntensityClass, IntensityClass]
    p_z_alice: float = 0.77
    p_x0: float | None = None
    p_y0: float | None = None
    p_z_bob: float = 0.5
    n_total: int = 3_000_000_000_000
    m_groups: int = 1

    def __post_init__(self) -> None:
        rest = (1.0 - self.p_z_alice) / 2.0
        if self.p_x0 is None:
            object.__setattr__(self, "p_x0", rest)
        if self.p_y0 is None:
            object.__setattr__(self, "p_y0", rest)

    def state_probability(self, state: StateLabel) -> float:
        if state is StateLabel.Z0 or state is StateLabel.Z1:
            return self.p_z_alice / 2.0
        if state is StateLabel.X0:
            return float(self.p_x0)
        return float(self.p_y0)

    def basis_probability(self, basis: BasisLabel) -> float:
        return self.p_z_bob if basis is BasisLabel.Z else 1.0 - self.p_z_bob

    def intensity(self, kind: IntensityKind) -> IntensityClass:
        for entry in self.intensities:
            if entry.kind is kind:
                return entry
        raise KeyError(kind)


@dataclass(frozen=True)
class CellCount:
    """Counts for one (state, basis, intensity) cell."""

    sent: int
    detected: int
    errors: int


class TallyError(ValueError):
    """A tally table violates a structural constraint."""


@dataclass(frozen=True, eq=True)
class ObservedTallies:
    """Detection and error counts for all 24 (state, basis, intensity) cells.

    ``sent`` is the number of pulses emitted with that (state, intensity)
    pair; the same value appears in both basis rows of a pair because the
    receiver's passive basis choice happens after emission.
    """

    cells: Mapping[CellKey, CellCount]

    def __post_init__(self) -> None:
        cells = dict(self.cells)
        missing = [key for key in ALL_CELLS if key not in cells]
        if missing or len(cells) != len(ALL_CELLS):
            raise TallyError(
                f"expected {len(ALL_CELLS)} cells, got {len(cells)}; missing {missing}"
            )
        for key, cc in cells.items():
            if not (0 <= cc.errors <= cc.detected <= cc.sent):
                raise TallyError(
                    f"cell {cell_name(key)}: need 0 <= errors <= detected <= sent, "
                    f"got sent={cc.sent} detected={cc.detected} errors={cc.errors}"
                )
        object.__setattr__(self, "cells", MappingProxyType(cells))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ObservedTallies):
            return NotImplemented
        return dict(self.cells) == dict(other.cells)

    def cell(self, state: StateLabel, basis: BasisLabel, kind: IntensityKind) -> CellCount:
        return self.cells[(state, basis, kind)]

    def class_detected(
        self, states: Iterable[StateLabel], basis: BasisLabel
    ) -> tuple[int, int, int]:
        """Detections per intensity (mu, nu, omega) summed over ``states``."""
        states = tuple(states)
        return tuple(
            sum(self.cells[(s, basis, k)].detected for s in states) for k in KINDS
        )  # type: ignore[return-value]

    def class_errors(
        self, states: Iterable[StateLabel], basis: BasisLabel
    ) -> tuple[int, int, int]:
        states = tuple(states)
        return tuple(
            sum(self.cells[(s, basis, k)].errors for s in states) for k in KINDS
        )  # type: ignore[return-value]

    def __add__(self, other: "ObservedTallies") -> "ObservedTallies":
        merged = {}
        for key in ALL_CELLS:
            a, b = self.cells[key], other.cells[key]
            merged[key] = CellCount(a.sent + b.sent, a.detected + b.detected, a.errors + b.errors)
        return ObservedTallies(merged)


def zero_tallies() -> ObservedTallies:
    return ObservedTallies({key: CellCount(0, 0, 0) for key in ALL_CELLS})


def cell_name(key: CellKey) -> str:
    state, basis, kind = key
    return f"({state.value},{basis.value},{kind.value})"


@dataclass(frozen=True)
class KeyRateReport:
    """Final key-length result with every intermediate bound kept for audit."""

    s0_zz_lower: float
    s1_zz_lower: float
    c44_lower: float
    i_e: float
    e_zz: float
    n_zz: int
    key_length: float
    key_rate: float
    intermediate: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "intermediate", MappingProxyType(dict(self.intermediate)))


def validate_config(
    cfg: ProtocolConfig, ch: ChannelParams, sec: SecurityParams
) -> list[str]:
    """Check every type invariant; return the full list of violations.

    An empty list means the configuration is valid. The list is sorted so
    repeated validation of the same input yields identical output.
    """
    bad: list[str] = []

    mu = cfg.intensity(IntensityKind.MU)
    nu = cfg.intensity(IntensityKind.NU)
    om = cfg.intensity(IntensityKind.OMEGA)
    for entry in (mu, nu, om):
        if entry.mean_photons < 0:
            bad.append(
                f"intensities.{entry.kind.value}: mean photon number must be >= 0, got {entry.mean_photons}"
            )
        if not 0.0 <= entry.probability <= 1.0:
            bad.append(
                f"intensities.{entry.kind.value}: probability must be in [0,1], got {entry.probability}"
            )
    if not mu.mean_photons > nu.mean_photons + om.mean_photons:
        bad.append(
            "intensities: require mu > nu + omega, got "
            f"mu={mu.mean_photons} nu={nu.mean_photons} omega={om.mean_photons}"
        )
    if not 0.0 <= om.mean_photons <= nu.mean_photons:
        bad.append(
            f"intensities: require 0 <= omega <= nu, got omega={om.mean_photons} nu={nu.mean_photons}"
        )
    psum = mu.probability + nu.probability + om.probability
    if abs(psum - 1.0) > PROB_TOL:
        bad.append(f"intensities: selection probabilities must sum to 1, got {psum!r}")

    ssum = cfg.p_z_alice + float(cfg.p_x0) + float(cfg.p_y0)
    if abs(ssum - 1.0) > PROB_TOL:
        bad.append(f"p_z_alice + p_x0 + p_y0 must sum to 1, got {ssum!r}")
    for name in ("p_z_alice", "p_x0", "p_y0"):
        val = float(getattr(cfg, name))
        if not 0.0 <= val <= 1.0:
            bad.append(f"{name}: must be in [0,1], got {val}")
    if not 0.0 < cfg.p_z_bob < 1.0:
        bad.append(f"p_z_bob: must be in (0,1), got {cfg.p_z_bob}")
    if cfg.n_total < 1:
        bad.append(f"n_total: must be >= 1, got {cfg.n_total}")
    if cfg.n_total > MAX_PULSES:
        bad.append(f"n_total: exceeds 64-bit count budget {MAX_PULSES}, got {cfg.n_total}")
    if cfg.m_groups < 1:
        bad.append(f"m_groups: must be >= 1, got {cfg.m_groups}")

    for name in ("e0", "e_d", "eta_det"):
        val = getattr(ch, name)
        if not 0.0 <= val <= 1.0:
            bad.append(f"{name}: must be in [0,1], got {val}")
    for name in ("alpha_db_per_km", "eta_z_db", "eta_xy_db"):
        val = getattr(ch, name)
        if val < 0.0:
            bad.append(f"{name}: must be >= 0, got {val}")
    if not 0.0 <= ch.beta < 2.0 * math.pi:
        bad.append(f"beta: must be in [0, 2*pi), got {ch.beta}")

    for name in ("eps_bar", "eps_ec", "eps_pa"):
        val = getattr(sec, name)
        if not 0.0 < val < 1.0:
            bad.append(f"{name}: must be in (0,1), got {val}")
    if sec.f_ec < 1.0:
        bad.append(f"f_ec: must be >= 1, got {sec.f_ec}")

    return sorted(bad)
