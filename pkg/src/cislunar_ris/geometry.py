"""Distances, Moon occlusion and the RIS reflection angle."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEGENERATE_TOL_KM = 1e-9


class DegenerateGeometryError(ValueError):
    pass


def euclidean_distance(p, q) -> float:
    """Straight-line distance between two 3-vectors (same units as input)."""
    d = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    return float(math.sqrt(d @ d))


def optimal_reflection_angle(earth, ris, moon) -> float:
    """Angle in [0, pi] between the Earth->RIS and RIS->Moon vectors.

    The cosine is clamped to [-1, 1] so collinear inputs return exactly
    0 or pi.
    """
    earth = np.asarray(earth, dtype=float)
    ris = np.asarray(ris, dtype=float)
    moon = np.asarray(moon, dtype=float)
    v_er = ris - earth
    v_rm = moon - ris
    n_er = math.sqrt(v_er @ v_er)
    n_rm = math.sqrt(v_rm @ v_rm)
    if n_er < DEGENERATE_TOL_KM or n_rm < DEGENERATE_TOL_KM:
        raise DegenerateGeometryError(
            f"reflection angle undefined: |v_er| = {n_er:.3e} km, |v_rm| = {n_rm:.3e} km"
        )
    cos_phi = float(v_er @ v_rm) / (n_er * n_rm)
    return math.acos(min(1.0, max(-1.0, cos_phi)))


def optimal_reflection_angle_many(earth, ris, moon):
    """Row-wise :func:`optimal_reflection_angle` for arrays of shape (n, 3)."""
    v_er = np.asarray(ris, dtype=float) - np.asarray(earth, dtype=float)
    v_rm = np.asarray(moon, dtype=float) - np.asarray(ris, dtype=float)
    n_er = np.sqrt(np.sum(v_er * v_er, axis=-1))
    n_rm = np.sqrt(np.sum(v_rm * v_rm, axis=-1))
    if np.any(n_er < DEGENERATE_TOL_KM) or np.any(n_rm < DEGENERATE_TOL_KM):
        raise DegenerateGeometryError("reflection angle undefined for a zero-length leg")
    cos_phi = np.sum(v_er * v_rm, axis=-1) / (n_er * n_rm)
    return np.arccos(np.clip(cos_phi, -1.0, 1.0))


def segment_clearance(p, q, center):
    """Distance from ``center`` to the closed segment pq (broadcasts over rows)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    center = np.asarray(center, dtype=float)
    d = q - p
    f = center - p
    dd = np.sum(d * d, axis=-1)
    # degenerate (zero-length) segments collapse onto p
    proj = np.sum(f * d, axis=-1)
    s = np.clip(np.divide(proj, dd, out=np.zeros_like(proj), where=dd > 0), 0.0, 1.0)
    closest = p + s[..., None] * d
    off = closest - center
    return np.sqrt(np.sum(off * off, axis=-1))


def line_of_sight_many(p, q, occluder_center, occluder_radius):
    """Vectorised :func:`line_of_sight`; returns a boolean array."""
    # symmetric by construction: evaluate from the lexicographically smaller end
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p, q = np.broadcast_arrays(p, q)
    swap = _lex_greater(p, q)
    a = np.where(swap[..., None], q, p)
    b = np.where(swap[..., None], p, q)
    clearance = segment_clearance(a, b, occluder_center)
    return clearance >= occluder_radius


def _lex_greater(p, q):
    out = np.zeros(p.shape[:-1], dtype=bool)
    decided = np.zeros(p.shape[:-1], dtype=bool)
    for k in range(p.shape[-1]):
        gt = ~decided & (p[..., k] > q[..., k])
        lt = ~decided & (p[..., k] < q[..., k])
        out |= gt
        decided |= gt | lt
    return out


def line_of_sight(p, q, occluder_center, occluder_radius: float) -> bool:
    """True unless segment pq enters the open ball of the occluder.

    Endpoints on the sphere surface count as visible.
    """
    if not occluder_radius > 0:
        raise ValueError(f"occluder_radius must be > 0, got {occluder_radius!r}")
    return bool(line_of_sight_many(p, q, occluder_center, occluder_radius))


@dataclass(frozen=True)
class LinkGeometry:
    """Ground station -> RIS platform -> destination geometry for one instant."""

    earth_station: tuple
    ris_platform: tuple
    destination: tuple
    d_er: float
    d_rm: float
    phi_opt: float

    @classmethod
    def from_points(cls, earth_station, ris_platform, destination):
        es = tuple(float(x) for x in earth_station)
        rp = tuple(float(x) for x in ris_platform)
        de = tuple(float(x) for x in destination)
        return cls(es, rp, de,
                   euclidean_distance(es, rp),
                   euclidean_distance(rp, de),
                   optimal_reflection_angle(es, rp, de))
