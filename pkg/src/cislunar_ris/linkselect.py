"""
GEO <-> LLO link availability and shortest-link selection over time.

:func:`availability_matrix` and :func:`select_shortest` work on a single
instant with the scalar orbital routines. :func:`run_timeseries` evaluates
the whole horizon with vectorised propagation in fixed-size chunks; the
chunk layout never depends on the worker count, so threaded and sequential
runs give bit-identical output.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import geometry
from .linkbudget import (LinkBudgetParams, SnrResult, floored_db,
                         optimal_transmit_power, received_power)
from .orbital import (EARTH, MOON, CentralBody, LunarEphemerisModel,
                      OrbitalElements, llo_many, llo_state_eci, moon_position,
                      moon_state_many, propagate, propagate_many)
from .ris import AREA_MODES, effective_area, element_areas, optimal_configuration

MAX_STEPS = 10_000_000
CHUNK_STEPS = 4096


@dataclass(frozen=True)
class RisSpec:
    """Surface sizing used to build the optimal configuration each step."""

    num_elements: int = 100
    area_mode: str = "fixed-total"
    directivity_constant: float = 0.1
    max_area: float = 100.0
    element_area: float = 1.0

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise ValueError(f"num_elements must be an integer >= 1, got {self.num_elements!r}")
        if self.area_mode not in AREA_MODES:
            raise ValueError(f"area_mode must be one of {AREA_MODES}, got {self.area_mode!r}")
        for name in ("directivity_constant", "max_area", "element_area"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")

    def areas(self) -> tuple:
        return element_areas(self.num_elements, self.area_mode,
                             self.max_area, self.element_area)

    def area_budget(self):
        # the A_max budget only binds when the total aperture is held fixed
        return self.max_area if self.area_mode == "fixed-total" else None

    def configuration(self, phi_opt: float):
        return optimal_configuration(self.num_elements, self.areas(),
                                     self.directivity_constant, phi_opt,
                                     self.area_budget())


@dataclass(frozen=True)
class Scenario:
    geo_elements: tuple
    llo_elements: tuple
    moon_model: LunarEphemerisModel = field(default_factory=LunarEphemerisModel)
    ground_station: tuple = (0.0, 0.0, 0.0)
    duration: float = 27.3 * 86400.0
    sampling_interval: float = 60.0
    budget: LinkBudgetParams = field(default_factory=LinkBudgetParams)
    ris: RisSpec = field(default_factory=RisSpec)
    earth: CentralBody = EARTH
    moon: CentralBody = MOON
    output: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "geo_elements", tuple(self.geo_elements))
        object.__setattr__(self, "llo_elements", tuple(self.llo_elements))
        object.__setattr__(self, "ground_station",
                           tuple(float(x) for x in self.ground_station))
        if len(self.ground_station) != 3:
            raise ValueError("ground_station must be a 3-vector")
        if not self.geo_elements:
            raise ValueError("scenario needs at least one GEO satellite")
        if not self.llo_elements:
            raise ValueError("scenario needs at least one LLO satellite")
        if not self.duration >= 0 or not math.isfinite(self.duration):
            raise ValueError(f"duration must be finite and >= 0, got {self.duration!r}")
        if not self.sampling_interval > 0:
            raise ValueError(f"sampling_interval must be > 0, got {self.sampling_interval!r}")
        if self.duration / self.sampling_interval > MAX_STEPS:
            raise ValueError(
                f"duration / sampling_interval exceeds the {MAX_STEPS} step cap"
            )
        for el in self.geo_elements:
            el.check_body(self.earth)
        for el in self.llo_elements:
            el.check_body(self.moon)

    @property
    def num_steps(self) -> int:
        # small slack so 27.3 d / 60 s is not lost to rounding
        return int(math.floor(self.duration / self.sampling_interval * (1 + 1e-12))) + 1

    def times(self) -> np.ndarray:
        return np.arange(self.num_steps, dtype=float) * self.sampling_interval


@dataclass(frozen=True)
class LinkSample:
    time: float
    geo_id: int
    llo_id: int
    distance: float
    visible: bool
    selected: bool = False


@dataclass(frozen=True)
class TimeseriesRecord:
    """One time step. Link fields are None during an outage."""

    time: float
    visible_count: int
    link: Optional[LinkSample] = None
    d_er: Optional[float] = None
    d_rm: Optional[float] = None
    phi_opt: Optional[float] = None
    a_eff: Optional[float] = None
    snr: Optional[SnrResult] = None

    @property
    def outage(self) -> bool:
        return self.link is None


def _positions_at(scenario: Scenario, t: float):
    geo = [propagate(el, scenario.earth, t).position for el in scenario.geo_elements]
    llo = [llo_state_eci(el, scenario.moon_model, t, scenario.moon).position
           for el in scenario.llo_elements]
    return geo, llo, moon_position(scenario.moon_model, t)


def availability_matrix(scenario: Scenario, t: float) -> list:
    """Every GEO x LLO pair at time ``t``, ordered by (geo_id, llo_id)."""
    if not 0 <= t <= scenario.duration:
        raise ValueError(f"t = {t} s lies outside [0, {scenario.duration}] s")
    geo, llo, moon = _positions_at(scenario, t)
    samples = []
    for g, gp in enumerate(geo):
        for m, lp in enumerate(llo):
            samples.append(LinkSample(
                float(t), g, m,
                geometry.euclidean_distance(gp, lp),
                geometry.line_of_sight(gp, lp, moon, scenario.moon.radius),
            ))
    return samples


def select_shortest(samples) -> Optional[LinkSample]:
    """Shortest visible link, ties broken by (geo_id, llo_id); None if all blocked."""
    visible = [s for s in samples if s.visible]
    if not visible:
        return None
    best = min(visible, key=lambda s: (s.distance, s.geo_id, s.llo_id))
    return replace(best, selected=True)


def selected_geometry(scenario: Scenario, t: float):
    """Selected link and its ground->GEO->LLO geometry at ``t`` (None on outage)."""
    geo, llo, _ = _positions_at(scenario, t)
    link = select_shortest(availability_matrix(scenario, t))
    if link is None:
        return None, None
    return link, geometry.LinkGeometry.from_points(
        scenario.ground_station, geo[link.geo_id], llo[link.llo_id])


def _evaluate_chunk(scenario: Scenario, times: np.ndarray) -> dict:
    geo = np.stack([propagate_many(el, scenario.earth, times)[0]
                    for el in scenario.geo_elements])
    llo = np.stack([llo_many(el, scenario.moon_model, times, scenario.moon)[0]
                    for el in scenario.llo_elements])
    moon, _ = moon_state_many(scenario.moon_model, times)

    n_geo, n_llo, n = len(geo), len(llo), len(times)
    g_idx, l_idx = np.divmod(np.arange(n_geo * n_llo), n_llo)
    p = geo[g_idx]
    q = llo[l_idx]
    diff = q - p
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    vis = geometry.line_of_sight_many(p, q, moon[None, :, :], scenario.moon.radius)

    masked = np.where(vis, dist, np.inf)
    # argmin returns the first minimum, i.e. the smallest (geo_id, llo_id)
    best = np.argmin(masked, axis=0)
    cols = np.arange(n)
    visible_count = vis.sum(axis=0)
    outage = visible_count == 0
    sel_geo = g_idx[best]
    sel_llo = l_idx[best]
    geo_sel = geo[sel_geo, cols]
    llo_sel = llo[sel_llo, cols]
    ground = np.broadcast_to(np.asarray(scenario.ground_station), geo_sel.shape)
    d_er_vec = geo_sel - ground
    d_er = np.sqrt(np.sum(d_er_vec * d_er_vec, axis=-1))
    d_rm = dist[best, cols]
    phi = geometry.optimal_reflection_angle_many(ground, geo_sel, llo_sel)
    return dict(times=times, sel_geo=sel_geo, sel_llo=sel_llo, visible_count=visible_count,
                outage=outage, d_er=d_er, d_rm=d_rm, phi=phi)


def evaluate_arrays(scenario: Scenario, workers: int = 1) -> dict:
    """Column arrays for every step; rows with ``outage`` set carry junk link data."""
    times = scenario.times()
    chunks = [times[i:i + CHUNK_STEPS] for i in range(0, len(times), CHUNK_STEPS)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _evaluate_chunk(scenario, c), chunks))
    else:
        parts = [_evaluate_chunk(scenario, c) for c in chunks]
    cols = {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}

    budget = replace(scenario.budget,
                     transmit_power=optimal_transmit_power(scenario.budget))
    # With phases set to phi_opt each cos^2 term is exactly 1, so the
    # aligned aperture does not depend on the step's phi_opt.
    a_eff = effective_area(scenario.ris.configuration(0.0), 0.0)
    safe_d_rm = np.where(cols["outage"], 1.0, cols["d_rm"])
    p_r = received_power(budget, np.full(len(times), a_eff), cols["d_er"], safe_d_rm)
    p_r = np.atleast_1d(p_r)
    snr_linear = p_r / budget.noise_power
    cols.update(a_eff=np.full(len(times), a_eff), p_r=p_r, snr_linear=snr_linear,
                snr_db=np.atleast_1d(floored_db(snr_linear)),
                feasible=(snr_linear >= budget.snr_threshold) & ~cols["outage"])
    return cols


def run_timeseries(scenario: Scenario, workers: int = 1) -> list:
    """One :class:`TimeseriesRecord` per step, endpoints inclusive."""
    cols = evaluate_arrays(scenario, workers)
    records = []
    for i in range(len(cols["times"])):
        t = float(cols["times"][i])
        count = int(cols["visible_count"][i])
        if cols["outage"][i]:
            records.append(TimeseriesRecord(t, count))
            continue
        d_rm = float(cols["d_rm"][i])
        link = LinkSample(t, int(cols["sel_geo"][i]), int(cols["sel_llo"][i]),
                          d_rm, True, True)
        result = SnrResult(float(cols["snr_linear"][i]), float(cols["snr_db"][i]),
                           float(cols["p_r"][i]), bool(cols["feasible"][i]))
        records.append(TimeseriesRecord(t, count, link, float(cols["d_er"][i]), d_rm,
                                        float(cols["phi"][i]), float(cols["a_eff"][i]),
                                        result))
    return records
