#!/usr/bin/env python3
"""
测试文件 - 河道断面几何
--------------------
墙顶高程、面积/水深换算、水面宽、湿周、输水能力与摩阻坡度
"""

import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from floodcouple.core.cases import case3_wall
from floodcouple.core.geometry import (
    ChannelCrossSection,
    CrossSectionArray,
    SectionState,
    conveyance,
    depth_from_area,
    friction_slope,
    top_width,
    wall_elevation,
    wetted_area,
    wetted_perimeter,
)
from floodcouple.utils.errors import GeometryError


def section(width=0.5, bank_left=0.5, bank_right=0.5, n=0.009, bed=0.0):
    return ChannelCrossSection(bed, width, bank_left, bank_right, n)


def test_wall_elevation_is_min_of_banks():
    assert wall_elevation(section()) == 0.5
    assert wall_elevation(section(bank_left=0.2, bank_right=0.9)) == 0.2


def test_case3_wall_profile():
    assert float(case3_wall(12.0)) == pytest.approx(0.0800001, abs=2e-7)
    assert float(case3_wall(0.0)) == pytest.approx(0.2, abs=1e-6)
    assert float(case3_wall(20.0)) == pytest.approx(0.2, abs=1e-6)


def test_wetted_area_and_depth():
    assert wetted_area(section(), 0.0) == 0.0
    assert wetted_area(section(), 0.504) == pytest.approx(0.252, rel=1e-15)
    assert wetted_area(section(width=1.0), 2.5) == 2.5
    with pytest.raises(GeometryError):
        wetted_area(section(), -0.1)
    with pytest.raises(GeometryError):
        depth_from_area(section(), -1e-3)


def test_depth_area_round_trip():
    rng = np.random.default_rng(7)
    cs = section(width=0.37)
    h = rng.uniform(0.0, 3.0, 1000)
    assert np.allclose(depth_from_area(cs, wetted_area(cs, h)), h, rtol=1e-15, atol=0)


def test_top_width():
    cs = section(bed=0.1)
    assert top_width(cs, 0.0) == 0.0
    assert top_width(cs, 0.3) == 0.5
    # 墙顶以上宽度不变
    assert top_width(cs, 5.0) == 0.5


def test_wetted_perimeter_and_conveyance():
    cs = section(width=1.0, n=0.02)
    A = 0.5
    P = wetted_perimeter(cs, A)
    assert P == pytest.approx(2.0)
    assert conveyance(cs, A) == pytest.approx(A ** (5 / 3) / (0.02 * P ** (2 / 3)))
    assert conveyance(cs, 0.0) == 0.0
    assert np.isinf(conveyance(section(n=0.0), 0.2))


def test_friction_slope_sign_and_dry_cases():
    cs = section(width=1.0, n=0.02)
    sf = friction_slope(cs, 0.5, 0.3)
    assert sf > 0
    assert friction_slope(cs, 0.5, -0.3) == pytest.approx(-sf)
    assert friction_slope(cs, 0.0, 0.0) == 0.0
    assert friction_slope(section(n=0.0), 0.2, 1.0) == 0.0
    with pytest.raises(GeometryError):
        friction_slope(cs, 0.0, 0.1)


def test_invalid_sections_rejected():
    with pytest.raises(GeometryError):
        section(width=0.0)
    with pytest.raises(GeometryError):
        section(bed=1.0, bank_left=0.5)
    with pytest.raises(GeometryError):
        section(n=-0.01)
    with pytest.raises(GeometryError):
        SectionState(-1.0, 0.0)


def test_cross_section_array_matches_scalar_sections():
    sections = [section(width=0.5 + k, n=0.01 * k) for k in range(4)]
    arr = CrossSectionArray.from_sections(sections)
    assert len(arr) == 4
    assert arr[2] == sections[2]
    area = np.array([0.1, 0.2, 0.3, 0.4])
    expected = [conveyance(cs, a) for cs, a in zip(sections, area)]
    assert np.allclose(conveyance(arr, area), expected, equal_nan=False)


def test_section_state_helpers():
    cs = section(bed=1.0, bank_left=2.0, bank_right=2.0)
    st = SectionState(0.25, 0.5)
    assert st.velocity == 2.0
    assert st.depth(cs) == 0.5
    assert st.eta(cs) == 1.5
