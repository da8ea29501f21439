"""
RIS-assisted link budget.

Received power through the surface:

    P_r = L_ris * P_t G_t G_r lambda^2 A_eff / ((4 pi)^3 d_er^2 d_rm^2)

with distances in metres. SNR is P_r / N. Functions take distances in km
and convert once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KM = 1000.0
FOUR_PI_CUBED = (4.0 * math.pi) ** 3

SNR_FLOOR_DB = -300.0
SNR_FLOOR_LINEAR = 10.0 ** (SNR_FLOOR_DB / 10.0)


# --- unit conversions ------------------------------------------------------

def _unwrap(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def _check_positive(value, what):
    if not np.all(np.asarray(value) > 0):
        raise ValueError(f"{what} must be > 0 for a log-domain conversion, got {value!r}")


def db_to_linear(db):
    return _unwrap(10.0 ** (np.asarray(db, dtype=float) / 10.0))


def linear_to_db(ratio):
    _check_positive(ratio, "ratio")
    return _unwrap(10.0 * np.log10(np.asarray(ratio, dtype=float)))


dbi_to_linear = db_to_linear
linear_to_dbi = linear_to_db


def dbm_to_watt(dbm):
    return db_to_linear(np.asarray(dbm, dtype=float) - 30.0)


def watt_to_dbm(watt):
    return _unwrap(linear_to_db(watt) + 30.0)


def dbw_to_watt(dbw):
    return db_to_linear(dbw)


def watt_to_dbw(watt):
    return linear_to_db(watt)


def floored_db(ratio):
    """10 log10(ratio), clamped to SNR_FLOOR_DB; never -inf."""
    r = np.asarray(ratio, dtype=float)
    safe = np.where(r > SNR_FLOOR_LINEAR, r, SNR_FLOOR_LINEAR)
    out = np.where(r > SNR_FLOOR_LINEAR, 10.0 * np.log10(safe), SNR_FLOOR_DB)
    return _unwrap(out)


# --- parameters -----------------------------------------------------------

@dataclass(frozen=True)
class LinkBudgetParams:
    """Link constants in linear SI units (W, m, ratios)."""

    transmit_power: float = 40e3
    max_transmit_power: float = 40e3
    gain_tx: float = 1000.0
    gain_rx: float = 100.0
    wavelength: float = 0.03
    noise_power: float = 1e-13
    ris_insertion_loss: float = 0.9
    snr_threshold: float = 10.0 ** 0.2

    def __post_init__(self):
        for name in ("gain_tx", "gain_rx", "wavelength", "noise_power", "snr_threshold"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if not 0 <= self.max_transmit_power < math.inf:
            raise ValueError(
                f"max_transmit_power must be finite and >= 0, got {self.max_transmit_power!r}"
            )
        if not 0 <= self.transmit_power <= self.max_transmit_power:
            raise ValueError(
                f"transmit_power must satisfy 0 <= P_t <= P_t,max "
                f"({self.max_transmit_power!r}), got {self.transmit_power!r}"
            )
        if not 0 < self.ris_insertion_loss <= 1:
            raise ValueError(
                f"ris_insertion_loss must lie in (0, 1], got {self.ris_insertion_loss!r}"
            )

    @classmethod
    def from_table_units(cls, transmit_power_w, gain_tx_dbi, gain_rx_dbi,
                         wavelength_m, noise_dbm, ris_insertion_loss,
                         snr_threshold_db, max_transmit_power_w=None):
        if max_transmit_power_w is None:
            max_transmit_power_w = transmit_power_w
        return cls(transmit_power_w, max_transmit_power_w,
                   dbi_to_linear(gain_tx_dbi), dbi_to_linear(gain_rx_dbi),
                   wavelength_m, dbm_to_watt(noise_dbm), ris_insertion_loss,
                   db_to_linear(snr_threshold_db))


@dataclass(frozen=True)
class SnrResult:
    snr_linear: float
    snr_db: float
    received_power: float
    feasible: bool


# --- budget -----------------------------------------------------------------

def free_space_path_loss(distance_km, wavelength_m):
    """(4 pi d / lambda)^2 as a linear ratio."""
    if not np.all(np.asarray(distance_km) > 0) or not wavelength_m > 0:
        raise ValueError("distance and wavelength must be > 0")
    d = np.asarray(distance_km, dtype=float) * KM
    return _unwrap((4.0 * math.pi * d / wavelength_m) ** 2)


def received_power(params: LinkBudgetParams, a_eff, d_er_km, d_rm_km):
    """Power at the destination in W. Works elementwise on arrays."""
    if not (np.all(np.asarray(d_er_km) > 0) and np.all(np.asarray(d_rm_km) > 0)):
        raise ValueError("link distances must be > 0")
    if np.any(np.asarray(a_eff) < 0):
        raise ValueError("effective area must be >= 0")
    d_er = np.asarray(d_er_km, dtype=float) * KM
    d_rm = np.asarray(d_rm_km, dtype=float) * KM
    numerator = (params.ris_insertion_loss * params.transmit_power * params.gain_tx
                 * params.gain_rx * params.wavelength ** 2 * np.asarray(a_eff, dtype=float))
    # (d_er * d_rm)^2 keeps the result exactly symmetric in the two legs
    return _unwrap(numerator / (FOUR_PI_CUBED * (d_er * d_rm) ** 2))


def snr(params: LinkBudgetParams, a_eff: float, d_er_km: float, d_rm_km: float) -> SnrResult:
    p_r = received_power(params, a_eff, d_er_km, d_rm_km)
    ratio = p_r / params.noise_power
    return SnrResult(ratio, floored_db(ratio), p_r, bool(ratio >= params.snr_threshold))


def optimal_transmit_power(params: LinkBudgetParams) -> float:
    """SNR grows with P_t, so the best feasible power is the cap."""
    if params.max_transmit_power < 0:
        raise ValueError("max_transmit_power must be >= 0")
    return params.max_transmit_power
