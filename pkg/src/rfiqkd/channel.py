"""Analytic model of the fiber channel, receiver paths and detectors.

The model is the standard threshold-detector weak-coherent-pulse one: a
pulse of intensity k is detected with probability ``1 - (1-e_d) * exp(-eta*k)``
and the misalignment error is sinusoidal in the reference-frame rotation
angle, scaled so that a rotation of zero reproduces the intrinsic error.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import cos, exp, sin

from .core import (
    ALL_CELLS,
    BasisLabel,
    CellCount,
    ChannelParams,
    IntensityClass,
    ObservedTallies,
    ProtocolConfig,
    StateLabel,
)


@dataclass(frozen=True)
class CellExpectation:
    """Per-pulse detection probability and per-detection error probability."""

    gain: float
    qber: float


def transmittance(distance_km: float, path: BasisLabel, ch: ChannelParams) -> float:
    """Overall efficiency of one receiver path at the given fiber length.

    Detector efficiency is folded in; the Z and X paths differ only by
    their fixed receiver losses in dB.
    """
    path_db = ch.eta_z_db if path is BasisLabel.Z else ch.eta_xy_db
    total_db = ch.alpha_db_per_km * distance_km + path_db
    return 10.0 ** (-total_db / 10.0) * ch.eta_det


def misalignment_error(
    state: StateLabel, basis: BasisLabel, beta: float, e0: float
) -> float:
    """Single-photon error probability of a cell before dark counts.

    Z states measured in Z see only the intrinsic error. Any state whose
    ideal outcome is balanced in the chosen basis sits at 1/2. The X0 and
    Y0 states read out the two quadratures of the rotation angle.
    """
    visibility = 1.0 - 2.0 * e0
    if basis is BasisLabel.Z:
        if state is StateLabel.Z0 or state is StateLabel.Z1:
            return e0
        return 0.5
    if state is StateLabel.X0:
        return (1.0 - visibility * cos(beta)) / 2.0
    if state is StateLabel.Y0:
        return (1.0 - visibility * sin(beta)) / 2.0
    return 0.5


def cell_expectation(
    state: StateLabel,
    basis: BasisLabel,
    k: IntensityClass,
    distance_km: float,
    ch: ChannelParams,
    beta: float | None = None,
) -> CellExpectation:
    """Expected gain and error rate of one cell.

    ``beta`` overrides the channel's rotation angle (used when replaying a
    drift trace).
    """
    eta = transmittance(distance_km, basis, ch)
    angle = ch.beta if beta is None else beta
    e_mis = misalignment_error(state, basis, angle, ch.e0)
    absorbed = exp(-eta * k.mean_photons)
    gain = 1.0 - (1.0 - ch.e_d) * absorbed
    if gain <= 0.0:
        return CellExpectation(0.0, 0.5)
    qber = (ch.e_d / 2.0 + e_mis * (1.0 - absorbed)) / gain
    return CellExpectation(gain, min(qber, 1.0))


def expected_tallies(
    cfg: ProtocolConfig,
    ch: ChannelParams,
    distance_km: float,
    beta: float | None = None,
) -> ObservedTallies:
    """Expected counts for every cell, rounded to the nearest integer."""
    cells = {}
    for key in ALL_CELLS:
        state, basis, kind = key
        k = cfg.intensity(kind)
        sent = cfg.n_total * cfg.state_probability(state) * k.probability
        exp_cell = cell_expectation(state, basis, k, distance_km, ch, beta=beta)
        detected = sent * cfg.basis_probability(basis) * exp_cell.gain
        errors = detected * exp_cell.qber
        sent_i = round(sent)
        det_i = min(round(detected), sent_i)
        err_i = min(round(errors), det_i)
        cells[key] = CellCount(sent_i, det_i, err_i)
    return ObservedTallies(cells)
