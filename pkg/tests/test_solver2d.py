#!/usr/bin/env python3
"""
测试文件 - 二维浅水求解器
----------------------
旋转变换、物理通量、HLL 通量、静水重构、摩阻与显式更新
"""

import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from floodcouple.config.settings import GRAVITY
from floodcouple.core.cases import LakeLevel, StepDepth
from floodcouple.core.mesh import ChannelSpec, DomainSpec, FloodplainSpec, build_mesh
from floodcouple.core.simulation import InitialCondition, initial_state
from floodcouple.core.solver2d import (
    boundary_ghosts,
    edge_residual,
    friction_source_2d,
    hll_flux,
    hydrostatic_depth,
    hydrostatic_pair,
    physical_flux_x,
    rotate,
    step_2d,
    unrotate,
    wave_speeds,
)
from floodcouple.utils.errors import CFLViolationError, DryStateError

rng = np.random.default_rng(12345)


def random_states(n):
    return np.stack([rng.uniform(1e-3, 4.0, n), rng.uniform(-4.0, 4.0, n),
                     rng.uniform(-4.0, 4.0, n)], axis=-1)


def random_normals(n):
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def test_rotation_round_trip_and_norm():
    w = random_states(10_000)
    n = random_normals(10_000)
    r = rotate(w, n)
    assert np.allclose(unrotate(r, n), w, rtol=0, atol=1e-13)
    assert np.allclose(r[:, 0], w[:, 0])
    assert np.allclose(np.hypot(r[:, 1], r[:, 2]), np.hypot(w[:, 1], w[:, 2]), rtol=0, atol=1e-13)


def test_rotation_axis_aligned():
    w = np.array([1.0, 2.0, 3.0])
    assert np.allclose(rotate(w, (1.0, 0.0)), w)
    assert np.allclose(rotate(w, (0.0, 1.0)), [1.0, 3.0, -2.0])
    assert np.allclose(rotate(w, (-1.0, 0.0)), [1.0, -2.0, -3.0])


def test_physical_flux():
    F = physical_flux_x(np.array([2.0, 1.0, 0.5]))
    assert np.allclose(F, [1.0, 0.5 + 0.5 * GRAVITY * 4.0, 0.25])
    assert np.allclose(physical_flux_x(np.zeros(3)), 0.0)
    with pytest.raises(DryStateError):
        physical_flux_x(np.array([0.0, 1.0, 0.0]))


def test_hll_consistency_randomized():
    w = random_states(10_000)
    F = physical_flux_x(w)
    assert np.array_equal(hll_flux(w, w), F)


def test_wave_speed_ordering():
    wL, wR = random_states(10_000), random_states(10_000)
    sL, sR = wave_speeds(wL, wR)
    assert np.all(sL <= sR)
    # 静水
    sL, sR = wave_speeds(np.array([1.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]))
    assert sL == pytest.approx(-np.sqrt(GRAVITY)) and sR == pytest.approx(np.sqrt(GRAVITY))


def test_hll_upwind_and_dry():
    wL = np.array([1.0, 10.0, 0.0])
    wR = np.array([1.2, 11.0, 0.0])
    assert np.allclose(hll_flux(wL, wR), physical_flux_x(wL))
    assert np.allclose(hll_flux(np.zeros(3), np.zeros(3)), 0.0)


def test_hll_rotational_invariance():
    wL, wR = random_states(2000), random_states(2000)
    n = random_normals(2000)
    flux = unrotate(hll_flux(rotate(wL, n), rotate(wR, n)), n)
    flipped = unrotate(hll_flux(rotate(wR, -n), rotate(wL, -n)), -n)
    assert np.allclose(flux, -flipped, rtol=1e-12, atol=1e-12)


def test_hydrostatic_pair_lake_at_rest():
    # η = 1，左侧河床 0.2，右侧 0.5
    wL = np.array([0.8, 0.0, 0.0])
    wR = np.array([0.5, 0.0, 0.0])
    wL_t, wR_t, S = hydrostatic_pair(wL, 0.2, wR, 0.5)
    assert wL_t[0] == pytest.approx(0.5) and wR_t[0] == pytest.approx(0.5)
    assert S[1] == pytest.approx(0.5 * GRAVITY * (0.64 - 0.25))
    F = hll_flux(wL_t, wR_t)
    # 左单元受到的合力 = g/2·H_L²
    assert F[1] + S[1] == pytest.approx(0.5 * GRAVITY * 0.64)


def test_hydrostatic_depth_keeps_higher_side():
    H = np.array([0.3, 0.7000000000000001, 0.0])
    assert np.array_equal(hydrostatic_depth(H, 0.5, np.array([0.2, 0.5, 0.1])), H)
    assert hydrostatic_depth(0.3, 0.2, 0.4) == pytest.approx(0.1)
    assert hydrostatic_depth(0.1, 0.2, 0.4) == 0.0


def test_hydrostatic_pair_dry_step():
    # 左侧水面低于右侧河床
    wL_t, wR_t, _ = hydrostatic_pair(np.array([0.3, 0.1, 0.0]), 0.0, np.zeros(3), 0.5)
    assert wL_t[0] == 0.0 and wL_t[1] == 0.0
    assert wR_t[0] == 0.0


def test_friction_semi_implicit_and_dry():
    w = np.array([[1.0, 2.0, -1.0], [0.0, 0.0, 0.0], [1e-3, 1.0, 0.0]])
    inc = friction_source_2d(w, 0.03, 0.1)
    assert inc[0, 1] < 0 and inc[0, 2] > 0
    assert np.all(inc[1] == 0)
    # 动量衰减但不反向，也不会一步归零
    assert 0.0 < w[2, 1] + inc[2, 1] < w[2, 1]
    assert np.all(friction_source_2d(w, 0.0, 0.1) == 0)


def test_friction_increment_value():
    n, dt = 0.009, 0.1
    f = GRAVITY * n ** 2 * dt
    inc = friction_source_2d(np.array([1.0, 1.0, 0.0]), n, dt)
    assert inc[1] == pytest.approx(-f / (1.0 + f), rel=1e-14)
    # 与显式增量 -g n² dt 一阶一致
    assert inc[1] == pytest.approx(-GRAVITY * n ** 2 * dt, rel=1e-3)
    assert inc[2] == 0.0


def test_friction_thin_film_keeps_moving():
    # 薄水层上 Δt·g n²|q|/H^(7/3) 远大于 1
    w = np.array([1e-5, 1e-6, 0.0])
    q_new = w[1] + friction_source_2d(w, 0.03, 0.1)[1]
    assert 0.0 < q_new < w[1]


def flat_box(nx=20, ny=10, bed=0.0):
    domain = DomainSpec(ChannelSpec(0.0, 2.0, 1.0, 1.5, cells=nx, lateral_cells=max(1, ny // 2)),
                        [FloodplainSpec('fp', 0.0, 2.0, 0.0, 1.0, nx, ny, bed=bed)])
    return build_mesh(domain, full2d=True)


def test_step_2d_lake_at_rest_with_emerged_bump():
    mesh = flat_box(bed=lambda x, y: 0.8 * np.exp(-((x - 1.0) ** 2 + (y - 0.5) ** 2) / 0.05))
    level = 0.5
    state = initial_state(mesh, InitialCondition(LakeLevel(level), LakeLevel(level)))
    m2 = mesh.mesh2d
    assert np.any(state.U[:, 0] == 0)
    U = state.U
    for _ in range(100):
        U = step_2d(m2, U, 0.005)
    wet = U[:, 0] > 0
    assert np.max(np.abs(m2.bed[wet] + U[wet, 0] - level)) <= 1e-12
    assert np.max(np.abs(U[:, 1:])) <= 1e-12
    assert np.all(U[~wet, 0] == 0)


def test_step_2d_conserves_mass_in_closed_box():
    mesh = flat_box()
    state = initial_state(mesh, InitialCondition(StepDepth(0.7, 0.5, 0.05), StepDepth(0.7, 0.5, 0.05)))
    m2 = mesh.mesh2d
    U = state.U
    volume = np.sum(U[:, 0] * m2.area)
    for _ in range(50):
        U = step_2d(m2, U, 0.004)
    assert np.sum(U[:, 0] * m2.area) == pytest.approx(volume, rel=1e-13)
    assert np.all(U[:, 0] >= 0)


def test_step_2d_raises_on_oversized_step():
    mesh = flat_box()
    state = initial_state(mesh, InitialCondition(StepDepth(0.7, 1.0, 0.001), StepDepth(0.7, 1.0, 0.001)))
    with pytest.raises(CFLViolationError) as info:
        step_2d(mesh.mesh2d, state.U, 5.0)
    assert info.value.cell is not None


def test_nonconforming_lake_residual_exactly_zero():
    # 上下两块在 y = 1 处非协调拼接
    domain = DomainSpec(ChannelSpec(0.0, 1.0, 3.0, 3.5, cells=2),
                        [FloodplainSpec('a', 0.0, 1.0, 0.0, 1.0, 7, 3, bed=0.2),
                         FloodplainSpec('b', 0.0, 1.0, 1.0, 2.0, 3, 4, bed=0.2)])
    m2 = build_mesh(domain).mesh2d
    U = np.zeros((m2.n_cells, 3))
    U[:, 0] = 0.9 - m2.bed
    assert np.all(edge_residual(m2, U, boundary_ghosts(m2, U)) == 0)
    U_next = U
    for _ in range(50):
        U_next = step_2d(m2, U_next, 0.01)
    assert np.array_equal(U_next, U)


def floodplain_only(x1, y1, nx, ny):
    # 河道远离漫滩块，网格中只有漫滩单元
    domain = DomainSpec(ChannelSpec(0.0, 2.0, 5.0, 5.5, cells=4),
                        [FloodplainSpec('fp', 0.0, x1, 0.0, y1, nx, ny)])
    return build_mesh(domain).mesh2d


def test_step_2d_invariant_under_axis_swap():
    ma = floodplain_only(2.0, 1.0, 20, 10)
    mb = floodplain_only(1.0, 2.0, 10, 20)
    Ua = np.zeros((ma.n_cells, 3))
    Ua[:, 0] = np.where(ma.x < 0.7, 0.5, 0.1) + 0.05 * ma.y
    Ub = np.zeros((mb.n_cells, 3))
    Ub[:, 0] = np.where(mb.y < 0.7, 0.5, 0.1) + 0.05 * mb.x
    for _ in range(30):
        Ua = step_2d(ma, Ua, 0.01)
        Ub = step_2d(mb, Ub, 0.01)
    swapped = Ub.reshape(20, 10, 3).transpose(1, 0, 2)[..., [0, 2, 1]]
    assert np.allclose(swapped, Ua.reshape(10, 20, 3), rtol=0, atol=1e-12)
    assert np.max(np.abs(Ua[:, 1])) > 0.01
