"""
Two-body orbit propagation and a circular lunar ephemeris.

All lengths are km, times are seconds from scenario start and angles are
radians. GEO satellites are propagated about the Earth; LLO satellites are
propagated about the Moon and then shifted/rotated into the Earth-centered
inertial (ECI) frame.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi
SECONDS_PER_DAY = 86400.0

# Semi-major axis cap for Moon-centered orbits (crude sphere of influence).
LUNAR_SOI_KM = 60000.0

KEPLER_TOL = 1e-12
KEPLER_MAX_ITER = 50


class KeplerSolverError(RuntimeError):
    """Newton iteration on Kepler's equation failed to converge."""

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"Kepler solver did not converge after {iterations} iterations "
            f"(residual {residual:.3e} rad)"
        )


def normalize_angle(angle):
    """Wrap an angle (scalar or array) into [0, 2*pi)."""
    wrapped = np.mod(angle, TWO_PI)
    # np.mod can round a tiny negative input up to exactly 2*pi
    wrapped = np.where(wrapped >= TWO_PI, 0.0, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class CentralBody:
    name: str
    gravitational_parameter: float  # km^3/s^2
    radius: float  # km

    def __post_init__(self):
        if not self.gravitational_parameter > 0:
            raise ValueError(
                f"gravitational_parameter must be > 0, got {self.gravitational_parameter!r}"
            )
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius!r}")


EARTH = CentralBody("Earth", 398600.4418, 6378.1)
MOON = CentralBody("Moon", 4902.800, 1737.4)


@dataclass(frozen=True)
class OrbitalElements:
    """Classical Keplerian elements.

    Angles are stored in radians; ``raan``, ``arg_perigee`` and
    ``true_anomaly`` are wrapped into [0, 2*pi) on construction.
    """

    semi_major_axis: float
    eccentricity: float
    inclination: float
    raan: float
    arg_perigee: float
    true_anomaly: float
    epoch: float = 0.0

    def __post_init__(self):
        values = (self.semi_major_axis, self.eccentricity, self.inclination,
                  self.raan, self.arg_perigee, self.true_anomaly, self.epoch)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"orbital elements must be finite, got {values}")
        if not self.semi_major_axis > 0:
            raise ValueError(f"semi_major_axis must be > 0, got {self.semi_major_axis!r}")
        if not 0 <= self.eccentricity < 1:
            raise ValueError(
                f"eccentricity must lie in [0, 1), got {self.eccentricity!r}"
            )
        if not 0 <= self.inclination <= math.pi:
            raise ValueError(
                f"inclination must lie in [0, pi] rad, got {self.inclination!r}"
            )
        for name in ("raan", "arg_perigee", "true_anomaly"):
            object.__setattr__(self, name, normalize_angle(float(getattr(self, name))))

    @classmethod
    def from_degrees(cls, semi_major_axis, eccentricity, inclination, raan,
                     arg_perigee, true_anomaly, epoch=0.0):
        return cls(semi_major_axis, eccentricity, math.radians(inclination),
                   math.radians(raan), math.radians(arg_perigee),
                   math.radians(true_anomaly), epoch)

    def check_body(self, body: CentralBody) -> None:
        """Raise ValueError if the orbit's semi-major axis is inside ``body``."""
        if not self.semi_major_axis > body.radius:
            raise ValueError(
                f"semi_major_axis {self.semi_major_axis} km does not exceed "
                f"{body.name} radius {body.radius} km"
            )


@dataclass(frozen=True)
class StateVector:
    position: np.ndarray = field(compare=False)  # km, ECI
    velocity: np.ndarray = field(compare=False)  # km/s
    epoch: float = 0.0

    def __post_init__(self):
        pos = np.array(self.position, dtype=float)
        vel = np.array(self.velocity, dtype=float)
        pos.setflags(write=False)
        vel.setflags(write=False)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "velocity", vel)

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return (self.epoch == other.epoch
                and np.array_equal(self.position, other.position)
                and np.array_equal(self.velocity, other.velocity))

    __hash__ = None


@dataclass(frozen=True)
class LunarEphemerisModel:
    """Circular lunar orbit about the Earth.

    The orbit plane is tilted by ``inclination`` about the ECI x axis, so
    the ascending node lies on +x.
    """

    orbit_radius: float = 384400.0
    sidereal_period: float = 27.321661 * SECONDS_PER_DAY
    inclination: float = math.radians(5.145)
    phase_at_epoch: float = 0.0

    def __post_init__(self):
        if not self.orbit_radius > 0:
            raise ValueError(f"orbit_radius must be > 0, got {self.orbit_radius!r}")
        if not self.sidereal_period > 0:
            raise ValueError(f"sidereal_period must be > 0, got {self.sidereal_period!r}")
        if not 0 <= self.inclination <= math.pi:
            raise ValueError(f"inclination must lie in [0, pi] rad, got {self.inclination!r}")
        object.__setattr__(self, "phase_at_epoch", normalize_angle(float(self.phase_at_epoch)))

    @property
    def mean_motion(self) -> float:
        return TWO_PI / self.sidereal_period

    def plane_rotation(self) -> np.ndarray:
        """Rotation from the lunar orbit-plane frame into ECI."""
        return _rot_x(self.inclination)


# --- Kepler's equation -------------------------------------------------------

def _solve_kepler_array(M, e):
    """Newton-Raphson on E - e sin E = M for arrays; M already in [0, 2*pi)."""
    M = np.asarray(M, dtype=float)
    E = M.copy()
    if e == 0.0:
        return E, np.zeros_like(M), 0
    for it in range(1, KEPLER_MAX_ITER + 1):
        f = E - e * np.sin(E) - M
        step = f / (1.0 - e * np.cos(E))
        E = E - step
        if np.all(np.abs(step) < KEPLER_TOL):
            break
    residual = np.abs(E - e * np.sin(E) - M)
    return E, residual, it


def solve_kepler_equation(mean_anomaly, eccentricity: float):
    """Eccentric anomaly in [0, 2*pi) for the given mean anomaly.

    Accepts a scalar or an array of mean anomalies. Raises
    KeplerSolverError if any residual stays above 1e-12 rad.
    """
    if not 0 <= eccentricity < 1:
        raise ValueError(f"eccentricity must lie in [0, 1), got {eccentricity!r}")
    if not np.all(np.isfinite(mean_anomaly)):
        raise ValueError("mean_anomaly must be finite")
    M = normalize_angle(np.asarray(mean_anomaly, dtype=float))
    E, residual, iterations = _solve_kepler_array(M, float(eccentricity))
    worst = float(np.max(residual)) if np.size(residual) else 0.0
    if worst >= KEPLER_TOL:
        raise KeplerSolverError(worst, iterations)
    E = normalize_angle(E)
    if np.ndim(mean_anomaly) == 0:
        return float(E)
    return E


def true_to_eccentric(nu, e):
    return normalize_angle(
        2.0 * np.arctan2(np.sqrt(1.0 - e) * np.sin(nu / 2.0),
                         np.sqrt(1.0 + e) * np.cos(nu / 2.0)))


def eccentric_to_true(E, e):
    return normalize_angle(
        2.0 * np.arctan2(np.sqrt(1.0 + e) * np.sin(E / 2.0),
                         np.sqrt(1.0 - e) * np.cos(E / 2.0)))


# --- frames --------------------------------------------------------------

def _rot_x(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def perifocal_to_inertial(elements: OrbitalElements) -> np.ndarray:
    """Rotation matrix R3(-raan) R1(-i) R3(-argp)."""
    cO, sO = math.cos(elements.raan), math.sin(elements.raan)
    cw, sw = math.cos(elements.arg_perigee), math.sin(elements.arg_perigee)
    ci, si = math.cos(elements.inclination), math.sin(elements.inclination)
    return np.array([
        [cO * cw - sO * sw * ci, -cO * sw - sO * cw * ci, sO * si],
        [sO * cw + cO * sw * ci, -sO * sw + cO * cw * ci, -cO * si],
        [sw * si, cw * si, ci],
    ])


def _state_from_eccentric(elements, mu, E):
    """Inertial position/velocity arrays of shape (n, 3) from eccentric anomalies."""
    a, e = elements.semi_major_axis, elements.eccentricity
    cosE, sinE = np.cos(E), np.sin(E)
    root = math.sqrt(1.0 - e * e)
    x = a * (cosE - e)
    y = a * root * sinE
    rate = math.sqrt(mu / a) / (1.0 - e * cosE)
    vx = -rate * sinE
    vy = rate * root * cosE
    R = perifocal_to_inertial(elements)
    pos = np.outer(x, R[:, 0]) + np.outer(y, R[:, 1])
    vel = np.outer(vx, R[:, 0]) + np.outer(vy, R[:, 1])
    return pos, vel


def orbital_period(elements: OrbitalElements, body: CentralBody) -> float:
    return TWO_PI * math.sqrt(elements.semi_major_axis ** 3 / body.gravitational_parameter)


def elements_to_state(elements: OrbitalElements, body: CentralBody) -> StateVector:
    """State at the element epoch, in the body-centered inertial frame."""
    elements.check_body(body)
    E = true_to_eccentric(elements.true_anomaly, elements.eccentricity)
    pos, vel = _state_from_eccentric(elements, body.gravitational_parameter, np.array([E]))
    return StateVector(pos[0], vel[0], elements.epoch)


def propagate_many(elements: OrbitalElements, body: CentralBody, times):
    """Vectorised two-body propagation.

    Returns ``(positions, velocities)``, each of shape ``(len(times), 3)``.
    Each row depends only on its own time value.
    """
    elements.check_body(body)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < elements.epoch):
        raise ValueError("propagation time precedes the element epoch")
    e = elements.eccentricity
    mu = body.gravitational_parameter
    E0 = true_to_eccentric(elements.true_anomaly, e)
    M0 = E0 - e * math.sin(E0)
    n = math.sqrt(mu / elements.semi_major_axis ** 3)
    dt = times - elements.epoch
    M = normalize_angle(M0 + n * dt)
    E, residual, iterations = _solve_kepler_array(M, e)
    if residual.size and float(np.max(residual)) >= KEPLER_TOL:
        raise KeplerSolverError(float(np.max(residual)), iterations)
    E = np.where(dt == 0.0, E0, E)
    return _state_from_eccentric(elements, mu, E)


def propagate(elements: OrbitalElements, body: CentralBody, t: float) -> StateVector:
    """Exact two-body state at time ``t`` (seconds from scenario start)."""
    pos, vel = propagate_many(elements, body, [t])
    return StateVector(pos[0], vel[0], float(t))


def state_to_elements(state: StateVector, body: CentralBody) -> OrbitalElements:
    """Classical elements from a body-centered state.

    Circular and equatorial orbits get their undefined angles set to zero
    with the anomaly measured from the node or x axis.
    """
    mu = body.gravitational_parameter
    r = np.asarray(state.position, dtype=float)
    v = np.asarray(state.velocity, dtype=float)
    rn = np.linalg.norm(r)
    h = np.cross(r, v)
    hn = np.linalg.norm(h)
    node = np.cross([0.0, 0.0, 1.0], h)
    nn = np.linalg.norm(node)
    evec = ((v @ v - mu / rn) * r - (r @ v) * v) / mu
    e = float(np.linalg.norm(evec))
    energy = 0.5 * (v @ v) - mu / rn
    a = -mu / (2.0 * energy)
    inc = math.acos(max(-1.0, min(1.0, h[2] / hn)))

    eps = 1e-11
    if nn > eps * hn:
        raan = math.atan2(node[1], node[0])
    else:
        raan = 0.0
        node = np.array([1.0, 0.0, 0.0])
        nn = 1.0
    if e > eps:
        argp = _angle_between(node / nn, evec / e, h / hn)
        nu = _angle_between(evec / e, r / rn, h / hn)
    else:
        e = 0.0
        argp = 0.0
        nu = _angle_between(node / nn, r / rn, h / hn)
    return OrbitalElements(float(a), e, inc, raan, argp, nu, state.epoch)


def _angle_between(u, w, normal):
    """Signed angle from unit vector u to w about ``normal``, in [0, 2*pi)."""
    return normalize_angle(math.atan2(np.dot(np.cross(u, w), normal), np.dot(u, w)))


def specific_energy(position, velocity, mu):
    r = np.linalg.norm(position, axis=-1)
    return 0.5 * np.sum(np.asarray(velocity) ** 2, axis=-1) - mu / r


def angular_momentum(position, velocity):
    return np.linalg.norm(np.cross(position, velocity), axis=-1)


# --- Moon ----------------------------------------------------------------

def moon_state_many(model: LunarEphemerisModel, times):
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("lunar ephemeris is defined for t >= 0 only")
    u = model.phase_at_epoch + model.mean_motion * times
    cu, su = np.cos(u), np.sin(u)
    R = model.plane_rotation()
    r = model.orbit_radius
    pos = np.outer(r * cu, R[:, 0]) + np.outer(r * su, R[:, 1])
    speed = r * model.mean_motion
    vel = np.outer(-speed * su, R[:, 0]) + np.outer(speed * cu, R[:, 1])
    return pos, vel


def moon_position(model: LunarEphemerisModel, t):
    """Moon center in ECI (km). ``t`` may be a scalar or an array."""
    pos, _ = moon_state_many(model, t)
    if np.ndim(t) == 0:
        return pos[0]
    return pos


def llo_many(elements: OrbitalElements, moon_model: LunarEphemerisModel, times,
             body: CentralBody = MOON):
    """ECI positions/velocities of a Moon-orbiting satellite.

    The elements are referred to a Moon-centered frame whose axes are those
    of the lunar orbit plane; they are rotated into ECI and offset by the
    Moon's position.
    """
    if not elements.semi_major_axis < LUNAR_SOI_KM:
        raise ValueError(
            f"semi_major_axis {elements.semi_major_axis} km exceeds the lunar "
            f"sphere-of-influence cap {LUNAR_SOI_KM} km"
        )
    rel_pos, rel_vel = propagate_many(elements, body, times)
    R = moon_model.plane_rotation()
    moon_pos, moon_vel = moon_state_many(moon_model, times)
    return moon_pos + rel_pos @ R.T, moon_vel + rel_vel @ R.T


def llo_state_eci(elements: OrbitalElements, moon_model: LunarEphemerisModel,
                  t: float, body: CentralBody = MOON) -> StateVector:
    pos, vel = llo_many(elements, moon_model, [t], body)
    return StateVector(pos[0], vel[0], float(t))
