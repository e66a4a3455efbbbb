#!/usr/bin/env python3
"""
一维河道求解模块
-------------
Saint-Venant 方程的 Roe 拟线性格式：Roe 平均、波强度分解、
源项迎风投影（河床坡度与摩阻）和熵修正，给出不含耦合项的中间状态 w^{n+1*}。

河道两端用虚拟单元处理边界：
  wall  - 面积镜像，流量反号
  open  - 零梯度
  depth - 虚拟单元面积 A = B·h_b(t)，流量零梯度
"""

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from floodcouple.config.settings import DRY_DEPTH, GRAVITY
from floodcouple.core.geometry import CrossSectionArray, friction_slope
from floodcouple.core.solver2d import check_depth
from floodcouple.utils.logger import get_logger

logger = get_logger(__name__)


class State1D(NamedTuple):
    """一维守恒量：过水面积 A 与流量 Q（逐单元数组）"""
    area: np.ndarray
    discharge: np.ndarray


@dataclass
class RoeInterfaceData:
    """界面 i+1/2 上的 Roe 平均量（所有字段均为逐界面数组）"""
    A: np.ndarray
    u: np.ndarray
    B: np.ndarray
    h: np.ndarray
    c: np.ndarray
    Sf: np.ndarray
    lam1: np.ndarray
    lam2: np.ndarray
    inert: np.ndarray
    So: Optional[np.ndarray] = None
    alpha1: Optional[np.ndarray] = None
    alpha2: Optional[np.ndarray] = None
    beta1: Optional[np.ndarray] = None
    beta2: Optional[np.ndarray] = None
    nu1: Optional[np.ndarray] = None
    nu2: Optional[np.ndarray] = None

    @property
    def e1(self):
        return np.stack([np.ones_like(self.lam1), self.lam1], axis=-1)

    @property
    def e2(self):
        return np.stack([np.ones_like(self.lam2), self.lam2], axis=-1)


def _velocity(A, Q, B):
    wet = A > DRY_DEPTH * B
    return np.where(wet, Q / np.where(wet, A, 1.0), 0.0)


def cell_eigenvalues(A, Q, B):
    """单元特征值 (u - c, u + c)，c = √(gA/B)"""
    A = np.asarray(A, dtype=float)
    u = _velocity(A, np.asarray(Q, dtype=float), B)
    c = np.sqrt(GRAVITY * np.maximum(A, 0.0) / B)
    return u - c, u + c


def roe_averages(wL, wR, csL, csR, dt=None):
    """
    界面 Roe 平均

    参数:
        wL, wR: 左右单元的 (A, Q)
        csL, csR: 左右单元断面（ChannelCrossSection 或 CrossSectionArray）
        dt: 给定时把摩阻坡度截断到 |Ŝf| ≤ |û|/(g·dt)

    返回:
        RoeInterfaceData；两侧都干或 ĉ = 0 的界面标记为 inert
    """
    AL, QL = (np.asarray(v, dtype=float) for v in wL)
    AR, QR = (np.asarray(v, dtype=float) for v in wR)
    BL, BR = np.asarray(csL.width, dtype=float), np.asarray(csR.width, dtype=float)

    uL, uR = _velocity(AL, QL, BL), _velocity(AR, QR, BR)
    sL, sR = np.sqrt(AL), np.sqrt(AR)
    weight = sL + sR

    A_hat = 0.5 * (AL + AR)
    u_hat = np.where(weight > 0, (sL * uL + sR * uR) / np.where(weight > 0, weight, 1.0), 0.0)
    B_hat = 0.5 * (BL + BR)
    h_hat = A_hat / B_hat
    c_hat = np.sqrt(GRAVITY * h_hat)

    both_dry = (AL <= DRY_DEPTH * BL) & (AR <= DRY_DEPTH * BR)
    inert = both_dry | (c_hat <= 0)

    n_hat = 0.5 * (np.asarray(csL.manning_n, dtype=float) + np.asarray(csR.manning_n, dtype=float))
    zeros = np.zeros(np.broadcast(A_hat, n_hat).shape)
    avg = CrossSectionArray(zeros, np.broadcast_to(B_hat, zeros.shape), zeros, zeros,
                            np.broadcast_to(n_hat, zeros.shape))
    A_f = np.where(inert, 0.0, np.broadcast_to(A_hat, zeros.shape))
    Sf = np.asarray(friction_slope(avg, A_f, np.where(A_f > 0, A_f * u_hat, 0.0)), dtype=float)
    if dt is not None and dt > 0:
        limit = np.abs(u_hat) / (GRAVITY * dt)
        Sf = np.sign(Sf) * np.minimum(np.abs(Sf), limit)

    return RoeInterfaceData(
        A=A_hat, u=u_hat, B=B_hat, h=h_hat, c=c_hat, Sf=Sf,
        lam1=u_hat - c_hat, lam2=u_hat + c_hat, inert=inert,
    )


def wave_strengths(data, dA, dQ):
    """
    波强度 α̂₁ = (λ̂₂ΔA - ΔQ)/(2ĉ)，α̂₂ = (-λ̂₁ΔA + ΔQ)/(2ĉ)

    满足 α̂₁ê₁ + α̂₂ê₂ = (ΔA, ΔQ)；ĉ = 0 时为 0。
    """
    c = np.asarray(data.c, dtype=float)
    ok = c > 0
    two_c = np.where(ok, 2.0 * c, 1.0)
    alpha1 = np.where(ok, (data.lam2 * dA - dQ) / two_c, 0.0)
    alpha2 = np.where(ok, (-data.lam1 * dA + dQ) / two_c, 0.0)
    return alpha1, alpha2


def source_strengths(data, dx, dZb, dh, dA):
    """
    源项强度 β̂₁ = -gÂ/(2ĉ)·[(Ŝo - Ŝf)Δx - Δh̄ + ΔA/B̂]，β̂₂ = -β̂₁

    Ŝo = -ΔZ_b/Δx，静水状态下 λ̂₁α̂₁ - β̂₁ 严格为 0。
    """
    c = np.asarray(data.c, dtype=float)
    ok = c > 0
    So = -np.asarray(dZb, dtype=float) / dx
    bracket = (So - data.Sf) * dx - dh + dA / data.B
    beta1 = np.where(ok, -GRAVITY * data.A / np.where(ok, 2.0 * c, 1.0) * bracket, 0.0)
    return beta1, -beta1


def entropy_fix(lam_i, lam_next):
    """跨声速稀疏波的人工粘性 ν̂ = ¼(λ_{i+1} - λ_i)，仅当 λ_i < 0 < λ_{i+1}"""
    lam_i = np.asarray(lam_i, dtype=float)
    lam_next = np.asarray(lam_next, dtype=float)
    nu = np.where((lam_i < 0) & (lam_next > 0), 0.25 * (lam_next - lam_i), 0.0)
    return nu if nu.ndim else float(nu)


def ghost_states(channel, area, discharge, t=0.0):
    """
    河道两端虚拟单元

    返回:
        ((A_west, Q_west), (A_east, Q_east))
    """
    ghosts = []
    for side, cell in (('west', 0), ('east', -1)):
        spec = channel.boundary_spec(side)
        A, Q = float(area[cell]), float(discharge[cell])
        if spec.kind == 'wall':
            Q = -Q
        elif spec.kind == 'depth':
            A = float(channel.width[cell]) * spec.depth_at(t)
        ghosts.append((A, Q))
    return tuple(ghosts)


def _pad(values):
    return np.concatenate([[values[0]], values, [values[-1]]])


def _extended(channel, area, discharge, t):
    (Aw, Qw), (Ae, Qe) = ghost_states(channel, area, discharge, t)
    A = np.concatenate([[Aw], area, [Ae]])
    Q = np.concatenate([[Qw], discharge, [Qe]])
    cs = channel.sections
    sections = CrossSectionArray(_pad(cs.bed_elevation), _pad(cs.width), _pad(cs.bank_left),
                                 _pad(cs.bank_right), _pad(cs.manning_n))
    dx = _pad(channel.dx)
    return A, Q, sections, dx


def interface_data(channel, area, discharge, dt=None, t=0.0):
    """
    全部 N+1 个界面（含两端虚拟单元界面）的 Roe 数据，α̂、β̂、ν̂ 均已填充
    """
    A, Q, cs, dx = _extended(channel, area, discharge, t)
    left = CrossSectionArray(cs.bed_elevation[:-1], cs.width[:-1], cs.bank_left[:-1],
                             cs.bank_right[:-1], cs.manning_n[:-1])
    right = CrossSectionArray(cs.bed_elevation[1:], cs.width[1:], cs.bank_left[1:],
                              cs.bank_right[1:], cs.manning_n[1:])
    data = roe_averages((A[:-1], Q[:-1]), (A[1:], Q[1:]), left, right, dt=dt)

    dA = np.diff(A)
    dQ = np.diff(Q)
    dZb = np.diff(cs.bed_elevation)
    dh = np.diff(A / cs.width)
    dx_face = 0.5 * (dx[:-1] + dx[1:])

    alpha1, alpha2 = wave_strengths(data, dA, dQ)
    beta1, beta2 = source_strengths(data, dx_face, dZb, dh, dA)

    lam1, lam2 = cell_eigenvalues(A, Q, cs.width)
    nu1 = entropy_fix(lam1[:-1], lam1[1:])
    nu2 = entropy_fix(lam2[:-1], lam2[1:])

    def zero(values):
        return np.where(data.inert, 0.0, values)

    return replace(
        data,
        So=-dZb / dx_face,
        alpha1=zero(alpha1), alpha2=zero(alpha2),
        beta1=zero(beta1), beta2=zero(beta2),
        nu1=zero(nu1), nu2=zero(nu2),
    )


def fluctuations(data):
    """
    界面左右行波动 (Σγ̂⁺ê, Σγ̂⁻ê)

    γ̂ = λ̂α̂ - β̂，γ̂^± = ½(1 ± sgn λ̂)γ̂ ± ν̂α̂
    """
    plus = np.zeros(data.lam1.shape + (2,))
    minus = np.zeros_like(plus)
    for lam, alpha, beta, nu, e in ((data.lam1, data.alpha1, data.beta1, data.nu1, data.e1),
                                    (data.lam2, data.alpha2, data.beta2, data.nu2, data.e2)):
        gamma = lam * alpha - beta
        sgn = np.sign(lam)
        g_plus = 0.5 * (1.0 + sgn) * gamma + nu * alpha
        g_minus = 0.5 * (1.0 - sgn) * gamma - nu * alpha
        plus += g_plus[:, None] * e
        minus += g_minus[:, None] * e
    return plus, minus


def step_1d(channel, area, discharge, dt, t=0.0):
    """
    一维 Roe 格式更新一步（不含耦合项）

    w_i* = w_i - Δt/Δx_i·[Σγ̂⁺ê |_{i-1/2} + Σγ̂⁻ê |_{i+1/2}]

    参数:
        channel: ChannelGrid1D
        area, discharge: 逐单元 A、Q
        dt: 时间步长
        t: 当前时刻（用于给定水深边界）

    返回:
        State1D(A*, Q*)
    """
    data = interface_data(channel, area, discharge, dt=dt, t=t)
    plus, minus = fluctuations(data)
    update = plus[:-1] + minus[1:]
    lam = dt / channel.dx

    A_new = area - lam * update[:, 0]
    Q_new = discharge - lam * update[:, 1]
    A_new = check_depth(A_new, what='一维单元')

    dry = A_new <= DRY_DEPTH * channel.width
    Q_new = np.where(dry, 0.0, Q_new)
    return State1D(A_new, Q_new)
