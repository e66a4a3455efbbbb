#!/usr/bin/env python3
"""
一维/二维耦合模块
--------------
由耦合边上的二维数值通量组装一维方程的耦合源项 Φ = (Φ^A, Φ^Q)，
并给出同一通量在二维漫滩单元一侧的贡献，保证两侧交换的水量完全相同。

每条耦合边的通量只在 n 时刻计算一次，同时供 Φ 组装和二维更新使用。
FBM 基准方法与 HCM 走同一条路径，只是侧向流量恒为 0。
"""

from dataclasses import dataclass

import numpy as np

from floodcouple.config.settings import DRY_DEPTH, GRAVITY
from floodcouple.core.lateral import side_interface_states
from floodcouple.core.solver1d import State1D
from floodcouple.core.solver2d import hll_flux, rotate, unrotate, without_pressure
from floodcouple.utils.errors import MeshBuildError
from floodcouple.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class CouplingTerm:
    """逐一维单元的耦合源项（单位河长）"""
    phi_A: np.ndarray
    phi_Q: np.ndarray

    @classmethod
    def zeros(cls, n_cells):
        return cls(np.zeros(n_cells), np.zeros(n_cells))

    def max_abs(self):
        if self.phi_A.size == 0:
            return 0.0
        return float(max(np.max(np.abs(self.phi_A)), np.max(np.abs(self.phi_Q))))


@dataclass
class InterfaceFlux:
    """
    耦合边对二维单元的贡献

    cell: 二维单元索引；length: 边长；flux: 二维单元外法向的单宽通量 (E, 3)
    """
    cell: np.ndarray
    length: np.ndarray
    flux: np.ndarray

    @classmethod
    def empty(cls):
        return cls(np.zeros(0, dtype=int), np.zeros(0), np.zeros((0, 3)))


@dataclass
class CouplingResult:
    term: CouplingTerm
    interface: InterfaceFlux


def _edge_flux(w_tilde, pi_tilde, n):
    """河道外法向坐标下的 HLL 通量 F = φ(T w̃, T Π̃)"""
    return hll_flux(rotate(w_tilde, n), rotate(pi_tilde, n))


def edge_coupling(side, w_tilde, pi_2d, H_2d, h2, n_side, ratio):
    """
    单条耦合边的 Ψ

    参数:
        side: 'south' 或 'north'
        w_tilde: 河道重构状态 (h₂, h₂ū, h₂v)
        pi_2d: 二维单元（静水重构后）状态
        H_2d: 二维单元水深
        h2: 河道重构水深
        n_side: 该侧外法向，n^y ≠ 0
        ratio: 权重 |e_ij|/Δx_i

    返回:
        (..., 2) 的 (Ψ^A, Ψ^Q)
    """
    nx, ny = float(n_side[0]), float(n_side[1])
    if ny == 0:
        raise MeshBuildError("耦合边法向 n^y 不能为 0")
    f = unrotate(_edge_flux(w_tilde, pi_2d, n_side), n_side)
    H_star = np.maximum(h2, H_2d)
    pressure = (nx / ny) * 0.5 * GRAVITY * H_star ** 2
    if side == 'south':
        psi_A = f[..., 0] / ny
        psi_Q = f[..., 1] / ny - pressure
    else:
        psi_A = -f[..., 0] / ny
        psi_Q = -f[..., 1] / ny + pressure
    return np.stack(np.broadcast_arrays(psi_A * ratio, psi_Q * ratio), axis=-1)


def assemble_coupling(n_cells, channel_cells, psi):
    """
    Φ_i = Σ_j Ψ^S_ij + Σ_j Ψ^N_ij

    参数:
        n_cells: 一维单元数
        channel_cells: 每条边所属的一维单元
        psi: (E, 2) 逐边 Ψ（已乘权重）
    """
    channel_cells = np.asarray(channel_cells, dtype=int)
    psi = np.asarray(psi, dtype=float).reshape(-1, 2)
    return CouplingTerm(
        phi_A=np.bincount(channel_cells, weights=psi[:, 0], minlength=n_cells),
        phi_Q=np.bincount(channel_cells, weights=psi[:, 1], minlength=n_cells),
    )


def interface_flux_2d_side(w_tilde, pi_tilde, n_side):
    """
    耦合边对二维单元的单宽通量（二维单元外法向为 -n_side）

    与 edge_coupling 使用同一个 F。二维单元一侧的静水修正 S = (0, g/2·(H_j² - H̃_j²), 0)
    与二维单元自身压力 g/2·H_j² 合并后为 -g/2·H̃_j²，与 edge_residual 的压力偏差形式一致，
    静水状态下 h₂ = H̃_j，贡献逐分量严格为 0。
    返回值的质量分量等于 -F¹，即河道经该边流出的单宽水量。
    """
    F = _edge_flux(w_tilde, pi_tilde, n_side)
    H_tilde = np.asarray(pi_tilde, dtype=float)[..., 0]
    return -unrotate(without_pressure(F, H_tilde), n_side)


def compute_coupling(channel, adjacency, area, discharge, q_north, q_south, mesh2d, U):
    """
    由 n 时刻数据计算全部耦合边：一维耦合项 Φ 与二维单元的界面通量

    返回:
        CouplingResult
    """
    n_cells = channel.n_cells
    dx = channel.dx
    cells, psis = [], []
    fp_cells, lengths, fluxes = [], [], []
    lateral = {'south': q_south, 'north': q_north}
    for adj in adjacency.sides():
        if adj.n_edges == 0:
            continue
        st = side_interface_states(channel, adj, area, discharge, lateral[adj.side], mesh2d, U)
        ratio = st.length / dx[st.channel_cell]
        psis.append(edge_coupling(adj.side, st.w_tilde, st.pi_tilde, st.H2d, st.h2,
                                  adj.normal, ratio))
        cells.append(st.channel_cell)
        fp_cells.append(st.floodplain_cell)
        lengths.append(st.length)
        fluxes.append(interface_flux_2d_side(st.w_tilde, st.pi_tilde, adj.normal))

    if not cells:
        return CouplingResult(CouplingTerm.zeros(n_cells), InterfaceFlux.empty())
    term = assemble_coupling(n_cells, np.concatenate(cells), np.concatenate(psis))
    interface = InterfaceFlux(np.concatenate(fp_cells), np.concatenate(lengths),
                              np.concatenate(fluxes))
    return CouplingResult(term, interface)


def fbm_coupling(channel, adjacency, area, discharge, mesh2d, U):
    """FBM 基准：侧向流量取 0 的耦合计算"""
    zeros = np.zeros(channel.n_cells)
    return compute_coupling(channel, adjacency, area, discharge, zeros, zeros, mesh2d, U)


def apply_coupling(w_star, phi, dt, channel=None):
    """
    w^{n+1} = w* + Δt·Φ

    面积为负时截断为 0（该单元流量也置 0），并记录被截断的水量。

    参数:
        w_star: step_1d 给出的 State1D
        phi: CouplingTerm
        dt: 时间步长
        channel: 可选，提供 Δx 与 B 用于水量诊断和干单元处理

    返回:
        State1D
    """
    area = np.asarray(w_star.area, dtype=float) + dt * phi.phi_A
    discharge = np.asarray(w_star.discharge, dtype=float) + dt * phi.phi_Q

    negative = area < 0
    if np.any(negative):
        dx = channel.dx[negative] if channel is not None else 1.0
        lost = float(np.sum(-area[negative] * dx))
        logger.warning(f"耦合更新后 {int(negative.sum())} 个一维单元面积为负，已截断为 0，"
                       f"截断水量 {lost:.3e} m³")
        area = np.where(negative, 0.0, area)
        discharge = np.where(negative, 0.0, discharge)

    if channel is not None:
        dry = area <= DRY_DEPTH * channel.width
        discharge = np.where(dry, 0.0, discharge)
    return State1D(area, discharge)
