import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cislunar_ris.ris import (RisConfiguration, apply_misalignment, effective_area,
                              element_areas, optimal_configuration)

phases = st.lists(st.floats(-20, 20), min_size=1, max_size=32)


def aligned(m, phi=1.0, area=1.0, k=0.1):
    return optimal_configuration(m, (area,) * m, k, phi)


def test_single_aligned_element():
    cfg = RisConfiguration((0.4,), (1.0,), 0.1)
    assert effective_area(cfg, 0.4) == 0.1


def test_single_quadrature_element():
    cfg = RisConfiguration((0.4 + math.pi / 2,), (1.0,), 0.1)
    assert effective_area(cfg, 0.4) == pytest.approx(0.0, abs=1e-32)


def test_hundred_aligned_elements():
    cfg = aligned(100)
    brute = 0.0
    for a, p in zip(cfg.element_areas, cfg.element_phases):
        brute += 0.1 * a * math.cos(1.0 - p) ** 2
    assert brute == pytest.approx(10.0, rel=1e-14)
    assert effective_area(cfg, 1.0) == pytest.approx(10.0, rel=1e-15)


def test_closed_form_phases():
    cfg = optimal_configuration(4, (1.0,) * 4, 0.1, 1.0)
    assert cfg.element_phases == (1.0,) * 4


def test_closed_form_wraps():
    cfg = optimal_configuration(3, (1.0,) * 3, 0.1, 2 * math.pi + 0.5)
    for p in cfg.element_phases:
        assert p == pytest.approx(0.5, abs=1e-15)


@given(st.integers(1, 64), st.floats(0, math.pi))
def test_optimal_hits_bound_exactly(m, phi):
    areas = tuple(np.random.default_rng(m).uniform(0.1, 2.0, m))
    cfg = optimal_configuration(m, areas, 0.1, phi)
    assert effective_area(cfg, phi) == cfg.max_effective_area


def test_optimal_dominates_random():
    rng = np.random.default_rng(7)
    cfg = aligned(100, phi=0.3)
    best = effective_area(cfg, 0.3)
    rand = rng.uniform(0, 2 * math.pi, size=(100_000, 100))
    oracle = np.sum(0.1 * np.cos(0.3 - rand) ** 2, axis=1)
    assert best == pytest.approx(10.0)
    assert np.all(oracle <= best)


@given(phases, st.floats(-10, 10))
def test_upper_bound(ph, phi):
    cfg = RisConfiguration(tuple(ph), (1.0,) * len(ph), 0.1)
    assert effective_area(cfg, phi) <= cfg.max_effective_area * (1 + 1e-15)


@given(phases, st.floats(0, 3))
def test_pi_periodicity(ph, phi):
    cfg = RisConfiguration(tuple(ph), (1.0,) * len(ph), 0.1)
    assert effective_area(cfg, phi + math.pi) == pytest.approx(effective_area(cfg, phi),
                                                               rel=1e-12, abs=1e-14)


def test_order_independent_sum():
    rng = np.random.default_rng(1)
    ph = rng.uniform(0, 6, 500)
    ar = rng.uniform(0.01, 3, 500)
    perm = rng.permutation(500)
    a = effective_area(RisConfiguration(tuple(ph), tuple(ar), 0.1), 0.7)
    b = effective_area(RisConfiguration(tuple(ph[perm]), tuple(ar[perm]), 0.1), 0.7)
    assert a == b


@pytest.mark.parametrize("m", [1, 10, 100, 1000])
def test_linear_in_m(m):
    a1 = effective_area(aligned(1), 1.0)
    am = effective_area(aligned(m), 1.0)
    assert 10 * math.log10(am / a1) == pytest.approx(10 * math.log10(m), abs=1e-12)


class TestMisalignment:
    def test_zero_is_identity(self):
        cfg = aligned(5)
        assert apply_misalignment(cfg, 0.0) == cfg

    def test_quadrature_kills_aperture(self):
        cfg = apply_misalignment(aligned(5), math.pi / 2)
        assert effective_area(cfg, 1.0) == pytest.approx(0.0, abs=1e-30)

    def test_quarter_pi_halves(self):
        cfg = aligned(8)
        half = effective_area(apply_misalignment(cfg, math.pi / 4), 1.0)
        brute = sum(0.1 * 1.0 * math.cos(math.pi / 4) ** 2 for _ in range(8))
        assert half == pytest.approx(brute, rel=1e-14)
        assert half == pytest.approx(0.5 * effective_area(cfg, 1.0), rel=1e-14)

    def test_keeps_areas_and_k(self):
        cfg = RisConfiguration((0.1, 0.2), (1.0, 3.0), 0.4)
        out = apply_misalignment(cfg, 1.0)
        assert out.element_areas == cfg.element_areas
        assert out.directivity_constant == 0.4

    @given(phases, st.floats(-7, 7))
    def test_inverse(self, ph, delta):
        cfg = RisConfiguration(tuple(ph), (1.0,) * len(ph), 0.1)
        back = apply_misalignment(apply_misalignment(cfg, delta), -delta)
        for a, b in zip(back.element_phases, cfg.element_phases):
            diff = (a - b + math.pi) % (2 * math.pi) - math.pi
            assert abs(diff) < 1e-12


class TestConfigurationInvariants:
    def test_empty(self):
        with pytest.raises(ValueError):
            RisConfiguration((), (), 0.1)

    def test_bad_area(self):
        with pytest.raises(ValueError):
            RisConfiguration((0.0,), (0.0,), 0.1)

    def test_bad_k(self):
        with pytest.raises(ValueError):
            RisConfiguration((0.0,), (1.0,), 0.0)

    def test_budget(self):
        with pytest.raises(ValueError, match="max_area"):
            RisConfiguration((0.0,) * 3, (50.0,) * 3, 0.1, max_area=100.0)
        RisConfiguration((0.0,) * 3, (100.0 / 3,) * 3, 0.1, max_area=100.0)

    def test_phases_normalised(self):
        cfg = RisConfiguration((-1.0, 7.0), (1.0, 1.0), 0.1)
        assert all(0 <= p < 2 * math.pi for p in cfg.element_phases)


def test_area_modes():
    assert element_areas(4, "fixed-total", 100.0) == (25.0,) * 4
    assert element_areas(4, "fixed-element", 100.0, 1.0) == (1.0,) * 4
    with pytest.raises(ValueError):
        element_areas(4, "bogus")
