#!/usr/bin/env python3
"""
侧向流量模块
-----------
每个一维单元沿中线分成北、南两个子单元，子单元状态为
w = (h̄, h̄ū, q_y)，前两个分量取自母单元。子单元按二维单元处理，
用静水重构格式推进 q_y 方程，得到南北两侧的侧向流量 q_y^N、q_y^S。

子单元的边：
  e_xb / e_xf - 与上下游同侧子单元的公共边（长 B/2，平底通量）
  e_NS        - 南北子单元之间的公共边（长 Δx）
  e_ij        - 与相邻二维漫滩单元的公共边（重构状态 + 压力修正）
侧边未被漫滩覆盖的部分按固壁处理。
"""

from dataclasses import dataclass

import numpy as np

from floodcouple.config.settings import DRY_DEPTH
from floodcouple.core.mesh import SIDE_NORMALS
from floodcouple.core.solver1d import ghost_states
from floodcouple.core.solver2d import (
    hll_flux,
    hydrostatic_depth,
    hydrostatic_pressure,
    rescale_state,
    rotate,
    unrotate,
)
from floodcouple.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class InterfaceStates:
    """
    一侧全部耦合边的界面状态（逐边数组）

    w_tilde 为河道子单元的重构状态，pi_tilde 为二维单元的静水重构状态，
    H2d 为二维单元原始水深，hbar 为河道单元水深。
    """
    side: str
    normal: tuple
    channel_cell: np.ndarray
    floodplain_cell: np.ndarray
    length: np.ndarray
    hbar: np.ndarray
    h2: np.ndarray
    w_tilde: np.ndarray
    pi_tilde: np.ndarray
    H2d: np.ndarray


def init_lateral(qy):
    """初始时刻两侧侧向流量都取给定的 q_y"""
    qy = np.asarray(qy, dtype=float)
    return qy.copy(), qy.copy()


def subcell_states(area, discharge, q_north, q_south, cs):
    """
    北、南子单元状态

    参数:
        area, discharge: 母单元 A、Q
        q_north, q_south: 两侧侧向流量
        cs: 断面（提供宽度 B）

    返回:
        (w^N, w^S)，形状 (..., 3)；干单元三个分量全为 0
    """
    area = np.asarray(area, dtype=float)
    B = np.asarray(cs.width, dtype=float)
    dry = area <= DRY_DEPTH * B
    h = np.where(dry, 0.0, area / B)
    hu = np.where(dry, 0.0, np.asarray(discharge, dtype=float) / B)
    wN = np.stack(np.broadcast_arrays(h, hu, np.where(dry, 0.0, q_north)), axis=-1)
    wS = np.stack(np.broadcast_arrays(h, hu, np.where(dry, 0.0, q_south)), axis=-1)
    return wN, wS


def _speeds(w):
    w = np.asarray(w, dtype=float)
    h = w[..., 0]
    wet = h > DRY_DEPTH
    hs = np.where(wet, h, 1.0)
    return np.where(wet, w[..., 1] / hs, 0.0), np.where(wet, w[..., 2] / hs, 0.0)


def reconstruct_interface(w_side, eta, zb_2d):
    """
    耦合边上的河道重构状态 w̃ = (h₂, h₂ū, h₂v)，h₂ = max(0, η̄ - z_b,2D)

    ū、v 取自子单元状态，干子单元速度为 0。
    """
    u, v = _speeds(w_side)
    h2 = np.maximum(0.0, np.asarray(eta, dtype=float) - np.asarray(zb_2d, dtype=float))
    return np.stack(np.broadcast_arrays(h2, h2 * u, h2 * v), axis=-1)


def lateral_velocity(area, q_side, width):
    """侧向速度 v = q_y/h̄，干单元为 0"""
    area = np.asarray(area, dtype=float)
    h = area / np.asarray(width, dtype=float)
    wet = h > DRY_DEPTH
    return np.where(wet, np.asarray(q_side, dtype=float) / np.where(wet, h, 1.0), 0.0)


def side_interface_states(channel, side_adjacency, area, discharge, q_side, mesh2d, U):
    """
    计算一侧所有耦合边两侧的重构状态

    河道侧 h₂ = max(0, η̄ - z_b,j)，二维侧 H̃_j = max(0, H_j + z_b,j - max(z_b,j, Z_b,i))。
    """
    adj = side_adjacency
    ci, fj = adj.channel_cell, adj.floodplain_cell
    B = channel.width[ci]
    w_side = np.stack([area[ci] / B, discharge[ci] / B, q_side[ci]], axis=-1)
    dry = area[ci] <= DRY_DEPTH * B
    w_side[dry] = 0.0

    zb_1d = channel.sections.bed_elevation[ci]
    zb_2d = mesh2d.bed[fj]
    hbar = w_side[:, 0]
    w_tilde = reconstruct_interface(w_side, zb_1d + hbar, zb_2d)

    Pi = U[fj]
    H_t = hydrostatic_depth(Pi[:, 0], zb_2d, zb_1d)
    return InterfaceStates(
        side=adj.side, normal=adj.normal, channel_cell=ci, floodplain_cell=fj,
        length=adj.length, hbar=hbar, h2=w_tilde[:, 0], w_tilde=w_tilde,
        pi_tilde=rescale_state(Pi, H_t), H2d=Pi[:, 0],
    )


def normal_flux(w_inner, w_outer, n):
    """边外法向 n 上的 HLL 通量，返回原坐标系分量 T^{-1}φ(T w_in, T w_out)"""
    return unrotate(hll_flux(rotate(w_inner, n), rotate(w_outer, n)), n)


def _wall_ghost(w, n):
    r = rotate(w, n)
    r[..., 1] = -r[..., 1]
    return unrotate(r, n)


def _end_ghosts(channel, area, discharge, q_side, t):
    ghosts = []
    for (A, Q), cell in zip(ghost_states(channel, area, discharge, t), (0, -1)):
        B = float(channel.width[cell])
        if A <= DRY_DEPTH * B:
            ghosts.append(np.zeros(3))
        else:
            ghosts.append(np.array([A / B, Q / B, q_side[cell]]))
    return ghosts


def _y_flux(w_inner, w_outer, n, h_own):
    """外法向 n 上的 φ₃ 减去本侧静水压力 n_y·g/2·h²"""
    return normal_flux(w_inner, w_outer, n)[:, 2] - n[1] * hydrostatic_pressure(h_own)


def lateral_residual(channel, adjacency, area, discharge, q_north, q_south, mesh2d, U, t=0.0):
    """
    两侧子单元 q_y 方程的边通量总和

    每条边的 φ₃ 扣除本子单元的静水压力 n_y·g/2·h̄²（子单元闭合，Σ|e|·n_y = 0）。
    耦合边上 φ₃ + g/2·n_y·(h̄² - h₂²) 扣除后即为 φ₃ - n_y·g/2·h₂²，静水状态下逐边为 0。

    返回:
        {'north': (N,), 'south': (N,)}
    """
    n_cells = channel.n_cells
    wN, wS = subcell_states(area, discharge, q_north, q_south, channel.sections)

    residual = {}
    for side, w, other, q in (('north', wN, wS, q_north), ('south', wS, wN, q_south)):
        n_side = SIDE_NORMALS[side]
        n_inner = (-n_side[0], -n_side[1])
        h = w[:, 0]

        west, east = _end_ghosts(channel, area, discharge, q, t)
        ext = np.vstack([west, w, east])
        total = _y_flux(w, ext[:-2], (-1.0, 0.0), h) * channel.edge_xb
        total += _y_flux(w, ext[2:], (1.0, 0.0), h) * channel.edge_xf
        total += _y_flux(w, other, n_inner, h) * channel.edge_ns

        adj = adjacency.side(side) if adjacency is not None else None
        covered = np.zeros(n_cells)
        if adj is not None and adj.n_edges:
            st = side_interface_states(channel, adj, area, discharge, q, mesh2d, U)
            flux = _y_flux(st.w_tilde, st.pi_tilde, n_side, st.h2)
            total += np.bincount(st.channel_cell, weights=flux * st.length, minlength=n_cells)
            covered = adj.side_length

        uncovered = np.maximum(channel.edge_ns - covered, 0.0)
        total += _y_flux(w, _wall_ghost(w, n_side), n_side, h) * uncovered
        residual[side] = total
    return residual


def step_lateral(channel, adjacency, area, discharge, q_north, q_south, mesh2d, U, dt, t=0.0):
    """
    推进两侧侧向流量一步（全部使用 n 时刻的状态）

    (q_y^s)^{n+1} = (q_y^s)^n - Δt/|K^s|·Σ|e|·φ₃

    返回:
        (q_y^N, q_y^S)^{n+1}
    """
    residual = lateral_residual(channel, adjacency, area, discharge, q_north, q_south,
                                mesh2d, U, t)
    area_n = channel.subcell_area_north
    area_s = channel.subcell_area_south
    qN = q_north - dt / area_n * residual['north']
    qS = q_south - dt / area_s * residual['south']

    dry = area <= DRY_DEPTH * channel.width
    qN = np.where(dry, 0.0, qN)
    qS = np.where(dry, 0.0, qS)
    return qN, qS
