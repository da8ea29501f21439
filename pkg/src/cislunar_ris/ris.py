"""
Passive reflecting-surface model.

Each element i has area a_i and phase phi_i. For a target phase phi_opt the
surface contributes an effective aperture

    A_eff = sum_i k * a_i * cos^2(phi_opt - phi_i)

which is maximised by setting every phi_i to phi_opt.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .orbital import normalize_angle

AREA_MODES = ("fixed-total", "fixed-element")

# Relative slack when checking sum(a_i) against the area budget.
_BUDGET_RTOL = 1e-12


@dataclass(frozen=True)
class RisConfiguration:
    element_phases: tuple
    element_areas: tuple
    directivity_constant: float = 0.1
    max_area: Optional[float] = None

    def __post_init__(self):
        phases = tuple(normalize_angle(float(p)) for p in self.element_phases)
        areas = tuple(float(a) for a in self.element_areas)
        if len(phases) < 1:
            raise ValueError("a RIS needs at least one element")
        if len(phases) != len(areas):
            raise ValueError(
                f"{len(phases)} phases given for {len(areas)} element areas"
            )
        if not all(math.isfinite(a) and a > 0 for a in areas):
            raise ValueError("every element area must be finite and > 0")
        if not self.directivity_constant > 0:
            raise ValueError(
                f"directivity_constant must be > 0, got {self.directivity_constant!r}"
            )
        if self.max_area is not None:
            total = math.fsum(areas)
            if total > self.max_area * (1 + _BUDGET_RTOL):
                raise ValueError(
                    f"total element area {total} m^2 exceeds max_area {self.max_area} m^2"
                )
        object.__setattr__(self, "element_phases", phases)
        object.__setattr__(self, "element_areas", areas)

    @property
    def num_elements(self) -> int:
        return len(self.element_phases)

    @property
    def total_area(self) -> float:
        return math.fsum(self.element_areas)

    @property
    def max_effective_area(self) -> float:
        """Upper bound k * sum(a_i), reached only by an aligned surface."""
        return math.fsum(self.directivity_constant * a for a in self.element_areas)


def element_areas(num_elements: int, mode: str, max_area: float = 100.0,
                  element_area: float = 1.0) -> tuple:
    """Per-element areas for the two sweep modes.

    ``fixed-total`` splits ``max_area`` evenly; ``fixed-element`` gives each
    element ``element_area`` so the aperture grows with M.
    """
    if num_elements < 1:
        raise ValueError(f"number of elements must be >= 1, got {num_elements}")
    if mode == "fixed-total":
        return (max_area / num_elements,) * num_elements
    if mode == "fixed-element":
        return (float(element_area),) * num_elements
    raise ValueError(f"unknown area mode {mode!r}; expected one of {AREA_MODES}")


def effective_area(config: RisConfiguration, phi_opt: float) -> float:
    """Effective aperture in m^2, summed with math.fsum (order independent)."""
    k = config.directivity_constant
    return math.fsum(
        k * a * math.cos(phi_opt - p) ** 2
        for a, p in zip(config.element_areas, config.element_phases)
    )


def optimal_configuration(num_elements: int, areas: Sequence[float], k: float,
                          phi_opt: float, max_area: Optional[float] = None) -> RisConfiguration:
    if num_elements != len(areas):
        raise ValueError(f"expected {num_elements} element areas, got {len(areas)}")
    phase = normalize_angle(float(phi_opt))
    return RisConfiguration((phase,) * num_elements, tuple(areas), k, max_area)


def apply_misalignment(config: RisConfiguration, delta: float) -> RisConfiguration:
    """Shift every element phase by ``delta`` radians."""
    phases = tuple(p + delta for p in config.element_phases)
    return RisConfiguration(phases, config.element_areas,
                            config.directivity_constant, config.max_area)

