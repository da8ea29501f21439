"""Earth -> GEO-mounted RIS -> low-lunar-orbit link simulator."""
from .geometry import (LinkGeometry, euclidean_distance, line_of_sight,
                       optimal_reflection_angle)
from .linkbudget import (LinkBudgetParams, SnrResult, free_space_path_loss,
                         optimal_transmit_power, received_power, snr)
from .linkselect import (LinkSample, RisSpec, Scenario, TimeseriesRecord,
                         availability_matrix, run_timeseries, select_shortest)
from .orbital import (EARTH, MOON, CentralBody, LunarEphemerisModel,
                      OrbitalElements, StateVector, elements_to_state,
                      llo_state_eci, moon_position, propagate,
                      solve_kepler_equation)
from .ris import (RisConfiguration, apply_misalignment, effective_area,
                  optimal_configuration)

__version__ = "0.1.0"
