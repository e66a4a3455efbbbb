#!/usr/bin/env python3
"""
测试文件 - 侧向流量
----------------
子单元状态、耦合边重构、侧向流量格式在静水和无漫滩时的行为
"""

import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from floodcouple.config.settings import GRAVITY
from floodcouple.core.geometry import ChannelCrossSection, CrossSectionArray
from floodcouple.core.lateral import (
    init_lateral,
    lateral_velocity,
    reconstruct_interface,
    side_interface_states,
    step_lateral,
    subcell_states,
)
from floodcouple.core.mesh import ChannelGrid1D, ChannelSpec, DomainSpec, FloodplainSpec, build_mesh


def coupled(fp_bed=0.5, cells=12, north=False):
    floodplains = [FloodplainSpec('south', 0.0, 6.0, 0.0, 1.0, 12, 4, bed=fp_bed)]
    if north:
        floodplains.append(FloodplainSpec('north', 1.0, 4.0, 1.5, 2.5, 5, 4, bed=fp_bed))
    return build_mesh(DomainSpec(ChannelSpec(0.0, 6.0, 1.0, 1.5, cells=cells), floodplains))


def lake(mesh, level):
    ch, m2 = mesh.channel, mesh.mesh2d
    area = ch.width * np.maximum(level - ch.sections.bed_elevation, 0.0)
    U = np.zeros((m2.n_cells, 3))
    U[:, 0] = np.maximum(level - m2.bed, 0.0)
    return area, np.zeros(ch.n_cells), U


def test_init_lateral_copies():
    qN, qS = init_lateral([0.1, 0.2])
    qN[0] = 5.0
    assert qS[0] == 0.1


def test_subcell_states():
    cs = ChannelCrossSection(0.0, 0.5, 1.0, 1.0)
    wN, wS = subcell_states(0.25, 0.1, 0.03, -0.02, cs)
    assert np.allclose(wN, [0.5, 0.2, 0.03])
    assert np.allclose(wS, [0.5, 0.2, -0.02])
    wN, wS = subcell_states(0.0, 0.0, 0.03, -0.02, cs)
    assert np.all(wN == 0) and np.all(wS == 0)


def test_reconstruct_interface():
    w = np.array([0.6, 0.3, 0.06])
    rec = reconstruct_interface(w, 0.6, 0.2)
    assert np.allclose(rec, [0.4, 0.2, 0.04])
    # 水面低于漫滩河床
    assert np.all(reconstruct_interface(w, 0.6, 0.8) == 0)


def test_lateral_velocity():
    assert lateral_velocity(0.25, 0.1, 0.5) == pytest.approx(0.2)
    assert lateral_velocity(0.0, 0.0, 0.5) == 0.0


def test_side_interface_states_lake_at_rest():
    mesh = coupled()
    area, discharge, U = lake(mesh, 0.8)
    zeros = np.zeros(mesh.channel.n_cells)
    st = side_interface_states(mesh.channel, mesh.adjacency.south, area, discharge, zeros,
                               mesh.mesh2d, U)
    assert np.allclose(st.h2, 0.3)
    assert np.allclose(st.pi_tilde[:, 0], 0.3)
    assert np.allclose(st.hbar, 0.8)


def test_step_lateral_lake_at_rest_stays_still():
    mesh = coupled(north=True)
    area, discharge, U = lake(mesh, 0.8)
    qN = np.zeros(mesh.channel.n_cells)
    qS = np.zeros(mesh.channel.n_cells)
    for _ in range(50):
        qN, qS = step_lateral(mesh.channel, mesh.adjacency, area, discharge, qN, qS,
                              mesh.mesh2d, U, 0.01)
    # 北侧漫滩与河道单元非协调，静水下每条边的贡献仍严格为 0
    assert np.all(qN == 0)
    assert np.all(qS == 0)


def test_step_lateral_dry_floodplain_no_flow():
    # 水面低于漫滩：侧边等效为固壁
    mesh = coupled(fp_bed=1.0)
    area, discharge, U = lake(mesh, 0.6)
    assert np.all(U[:, 0] == 0)
    qN = np.zeros(mesh.channel.n_cells)
    qS = np.zeros(mesh.channel.n_cells)
    qN, qS = step_lateral(mesh.channel, mesh.adjacency, area, discharge, qN, qS, mesh.mesh2d, U, 0.01)
    assert np.max(np.abs(qS)) <= 1e-13
    assert np.max(np.abs(qN)) <= 1e-13


def test_step_lateral_drives_flow_toward_lower_floodplain():
    mesh = coupled(fp_bed=0.5)
    area, discharge, U = lake(mesh, 0.8)
    U[:, 0] = 0.05
    qN = np.zeros(mesh.channel.n_cells)
    qS = np.zeros(mesh.channel.n_cells)
    qN, qS = step_lateral(mesh.channel, mesh.adjacency, area, discharge, qN, qS, mesh.mesh2d, U, 0.01)
    # 南侧漫滩水位更低，南子单元 q_y 指向 -y
    assert np.all(qS < 0)


def test_step_lateral_dry_channel_zeroed():
    mesh = coupled()
    ch = mesh.channel
    area = np.zeros(ch.n_cells)
    U = np.zeros((mesh.mesh2d.n_cells, 3))
    qN, qS = step_lateral(ch, mesh.adjacency, area, np.zeros(ch.n_cells), np.ones(ch.n_cells),
                          np.ones(ch.n_cells), mesh.mesh2d, U, 0.01)
    assert np.all(qN == 0) and np.all(qS == 0)


def test_step_lateral_mirror_symmetry():
    # 两侧漫滩关于河道中线对称，q_y^N = -q_y^S 的状态在推进中保持反对称
    floodplains = [FloodplainSpec('south', 0.0, 6.0, 0.0, 1.0, 12, 4, bed=0.5),
                   FloodplainSpec('north', 0.0, 6.0, 1.5, 2.5, 12, 4, bed=0.5)]
    mesh = build_mesh(DomainSpec(ChannelSpec(0.0, 6.0, 1.0, 1.5, cells=12), floodplains))
    ch, m2 = mesh.channel, mesh.mesh2d
    area, _, U = lake(mesh, 0.8)
    discharge = 0.02 * np.sin(ch.x_centers)
    U[:, 0] = 0.05 + 0.01 * m2.x
    qN = 0.02 + 0.01 * np.cos(ch.x_centers)
    qS = -qN
    for _ in range(5):
        qN, qS = step_lateral(ch, mesh.adjacency, area, discharge, qN, qS, m2, U, 0.01)
    assert np.array_equal(qN, -qS)
    assert not np.allclose(qN, 0.02 + 0.01 * np.cos(ch.x_centers))


def test_step_lateral_single_cell_value():
    # 单个河道单元、两侧都是固壁：q_y^N = 0.1，q_y^S = -0.1，水深 0.5
    sections = CrossSectionArray([0.0], [0.5], [np.inf], [np.inf], [0.0])
    ch = ChannelGrid1D(np.array([0.0, 1.0]), 0.0, 0.5, sections)
    dt = 0.01
    qN, qS = step_lateral(ch, None, np.array([0.25]), np.array([0.0]), np.array([0.1]),
                          np.array([-0.1]), None, None, dt)
    # 南北公共边与固壁边上的 HLL 通量（两边 s_L = -s_R），压力项相消后
    # 北子单元残差为 0.2·s_R，s_R = 0.2 + √(0.5g)
    s_R = 0.2 + np.sqrt(0.5 * GRAVITY)
    expected = 0.1 - dt / (1.0 * 0.5 / 2.0) * 0.2 * s_R
    assert qN[0] == pytest.approx(expected, rel=1e-12)
    assert qS[0] == pytest.approx(-expected, rel=1e-12)
    assert 0.0 < qN[0] < 0.1
