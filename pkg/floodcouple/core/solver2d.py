#!/usr/bin/env python3
"""
二维浅水方程求解模块
-----------------
边法向坐标旋转、HLL 数值通量、静水重构（含压力修正项）、
Manning 摩阻与显式更新。

状态向量按最后一维存储 (H, q_x, q_y)，所有函数对单个状态和
任意形状的状态数组同样适用。

单元残差按压力偏差形式累加：每条边的贡献减去本单元（重构后）水深的
静水压力 g/2·H̃²。闭合单元上 Σ|e|·n = 0，格式与原形式等价，
而静水状态下每条边的贡献逐项为 0，不依赖边长求和的舍入。
"""

import numpy as np

from floodcouple.config.settings import DRY_DEPTH, GRAVITY, NEGATIVE_DEPTH_TOLERANCE
from floodcouple.utils.errors import CFLViolationError, DryStateError
from floodcouple.utils.logger import get_logger

logger = get_logger(__name__)


def _velocity(H, q):
    """干单元（H ≤ DRY_DEPTH）速度取 0"""
    wet = H > DRY_DEPTH
    return np.where(wet, q / np.where(wet, H, 1.0), 0.0)


def _split(w):
    w = np.asarray(w, dtype=float)
    return w[..., 0], w[..., 1], w[..., 2]


def _normal(n):
    n = np.asarray(n, dtype=float)
    return n[..., 0], n[..., 1]


def rotate(state, n):
    """T_n·w = (H, n_x q_x + n_y q_y, -n_y q_x + n_x q_y)"""
    H, qx, qy = _split(state)
    nx, ny = _normal(n)
    return np.stack(np.broadcast_arrays(H, nx * qx + ny * qy, -ny * qx + nx * qy), axis=-1)


def unrotate(state, n):
    """T_n^{-1}·w，rotate 的逆变换"""
    H, qn, qt = _split(state)
    nx, ny = _normal(n)
    return np.stack(np.broadcast_arrays(H, nx * qn - ny * qt, ny * qn + nx * qt), axis=-1)


def hydrostatic_pressure(H):
    """静水压力项 g/2·H²（物理通量与压力偏差共用同一表达式）"""
    return 0.5 * GRAVITY * H * H


def without_pressure(flux, H):
    """旋转坐标下的通量减去 (0, g/2·H², 0)"""
    out = np.array(flux, dtype=float, copy=True)
    out[..., 1] -= hydrostatic_pressure(np.asarray(H, dtype=float))
    return out


def physical_flux_x(state, strict=True):
    """
    x 方向物理通量 F_1 = (q_x, q_x²/H + gH²/2, q_x q_y/H)

    参数:
        state: (H, q_x, q_y) 或其数组
        strict: 为 True 时 H = 0 且流量非零会抛出 DryStateError

    返回:
        与 state 同形状的通量
    """
    H, qx, qy = _split(state)
    if strict and np.any((H <= 0) & ((qx != 0) | (qy != 0))):
        raise DryStateError("干单元存在非零流量")
    wet = H > DRY_DEPTH
    u = _velocity(H, qx)
    v = _velocity(H, qy)
    mass = np.where(wet, qx, 0.0)
    return np.stack([mass, mass * u + hydrostatic_pressure(H), mass * v], axis=-1)


def wave_speeds(wL, wR):
    """
    旋转坐标下的最小/最大波速估计

    特征值为 u - c, u, u + c（c = √(gH)），取左右状态全部特征值的最小、最大值。
    """
    HL, qL, _ = _split(wL)
    HR, qR, _ = _split(wR)
    uL, uR = _velocity(HL, qL), _velocity(HR, qR)
    cL, cR = np.sqrt(GRAVITY * np.maximum(HL, 0.0)), np.sqrt(GRAVITY * np.maximum(HR, 0.0))
    sL = np.minimum(uL - cL, uR - cR)
    sR = np.maximum(uL + cL, uR + cR)
    return sL, sR


def hll_flux(wL, wR):
    """
    HLL 数值通量（旋转后的法向坐标）

    s_L ≥ 0 取 F_1(w_L)，s_R ≤ 0 取 F_1(w_R)，否则取中间态通量；两侧均干时通量为 0。
    中间态写成 F_L + s_L·(s_R Δw - ΔF)/(s_R - s_L)，两侧状态相同时严格等于 F_1(w)。
    """
    wL = np.asarray(wL, dtype=float)
    wR = np.asarray(wR, dtype=float)
    FL = physical_flux_x(wL, strict=False)
    FR = physical_flux_x(wR, strict=False)
    sL, sR = wave_speeds(wL, wR)
    sL_, sR_ = sL[..., None], sR[..., None]

    denom = np.where(sR_ > sL_, sR_ - sL_, 1.0)
    star = FL + sL_ * (sR_ * (wR - wL) - (FR - FL)) / denom
    flux = np.where(sL_ >= 0, FL, np.where(sR_ <= 0, FR, star))

    both_dry = (wL[..., 0] <= DRY_DEPTH) & (wR[..., 0] <= DRY_DEPTH)
    return np.where(both_dry[..., None], 0.0, flux)


def hydrostatic_depth(H, zb, zb_other):
    """静水重构水深 H̃ = max(0, H + z_b - max(z_b, z_b'))，较高一侧原样返回 H"""
    H = np.asarray(H, dtype=float)
    zb = np.asarray(zb, dtype=float)
    higher = zb >= zb_other
    return np.where(higher, np.maximum(H, 0.0), np.maximum(0.0, H + zb - np.maximum(zb, zb_other)))


def pressure_correction(H, H_tilde):
    """旋转坐标下的压力修正 S^hrm = (0, g/2·(H² - H̃²), 0)"""
    H = np.asarray(H, dtype=float)
    H_tilde = np.asarray(H_tilde, dtype=float)
    zero = np.zeros(np.broadcast(H, H_tilde).shape)
    return np.stack([zero, 0.5 * GRAVITY * (H * H - H_tilde * H_tilde), zero], axis=-1)


def rescale_state(w, H_tilde):
    """按 H̃/H 等比例缩放状态（H = 0 时为 0），水深分量取 H̃"""
    w = np.asarray(w, dtype=float)
    H = w[..., 0]
    scale = np.where(H > 0, H_tilde / np.where(H > 0, H, 1.0), 0.0)
    out = w * scale[..., None]
    out[..., 0] = H_tilde
    return out


def hydrostatic_pair(wL, zbL, wR, zbR):
    """
    界面两侧的静水重构

    参数:
        wL, wR: 界面两侧状态（H ≥ 0）
        zbL, zbR: 两侧单元河床高程

    返回:
        (w̃L, w̃R, S_hrm_L)，流量按 H̃/H 等比例缩放（H = 0 时为 0）
    """
    HL = np.asarray(wL, dtype=float)[..., 0]
    HR = np.asarray(wR, dtype=float)[..., 0]
    HL_t = hydrostatic_depth(HL, zbL, zbR)
    HR_t = hydrostatic_depth(HR, zbR, zbL)
    return rescale_state(wL, HL_t), rescale_state(wR, HR_t), pressure_correction(HL, HL_t)


def friction_source_2d(state, n_manning, dt):
    """
    Manning 摩阻增量，源项 S_b = -g n² q⃗|q⃗| / H^(7/3)

    以 f = Δt·g n²|q⃗|/H^(7/3) 记显式系数，增量取 -q⃗·f/(1 + f)：
    f 很小时与显式增量 -f·q⃗ 一致，薄水层上 f 很大时动量趋于 0 而不会
    在一步内被整体抹掉或反向。干单元增量为 0。
    """
    H, qx, qy = _split(state)
    n_manning = np.asarray(n_manning, dtype=float)
    wet = H > DRY_DEPTH
    qmag = np.hypot(qx, qy)
    Hs = np.where(wet, H, 1.0)
    f = np.where(wet, GRAVITY * n_manning ** 2 * qmag * dt / Hs ** (7.0 / 3.0), 0.0)
    factor = f / (1.0 + f)
    return np.stack(np.broadcast_arrays(np.zeros_like(factor), -factor * qx, -factor * qy), axis=-1)


def boundary_ghosts(mesh, U, t=0.0):
    """
    边界边的虚拟单元状态

    wall  镜像内部状态并反号法向动量
    open  零梯度
    depth 水深取 h_b(t)，流量零梯度
    """
    if mesh.bnd_cell.size == 0:
        return np.zeros((0, 3))
    inner = U[mesh.bnd_cell]
    ghost = inner.copy()
    for sid, spec in enumerate(mesh.bnd_specs):
        mask = mesh.bnd_spec_id == sid
        if spec.kind == 'wall':
            r = rotate(inner[mask], mesh.bnd_normal[mask])
            r[:, 1] = -r[:, 1]
            ghost[mask] = unrotate(r, mesh.bnd_normal[mask])
        elif spec.kind == 'depth':
            ghost[mask, 0] = spec.depth_at(t)
    return ghost


def scatter_add(res, cells, values):
    """按单元累加边贡献（bincount 逐分量求和）"""
    for k in range(res.shape[1]):
        res[:, k] += np.bincount(cells, weights=values[:, k], minlength=res.shape[0])


def edge_residual(mesh, U, ghosts, interface=None):
    """
    每个单元的边通量总和 Σ|e|·T^{-1}(φ + S^hrm - g/2·H²·e₁)

    φ + S^hrm - g/2·H² 化简为 φ - g/2·H̃²，内部边两侧各减去自己的重构压力，
    边界边减去内部单元的压力。

    interface: 可选的耦合边贡献，需提供 cell、length、flux（二维单元外法向的单宽通量，
    已按同样方式扣除二维单元的压力）
    """
    res = np.zeros_like(U)

    if mesh.edge_left.size:
        n = mesh.edge_normal
        left, right = mesh.edge_left, mesh.edge_right
        rL_t, rR_t, _ = hydrostatic_pair(rotate(U[left], n), mesh.bed[left],
                                         rotate(U[right], n), mesh.bed[right])
        F = hll_flux(rL_t, rR_t)
        length = mesh.edge_length[:, None]
        scatter_add(res, left, length * unrotate(without_pressure(F, rL_t[:, 0]), n))
        scatter_add(res, right, -length * unrotate(without_pressure(F, rR_t[:, 0]), n))

    if mesh.bnd_cell.size:
        n = mesh.bnd_normal
        inner = rotate(U[mesh.bnd_cell], n)
        F = hll_flux(inner, rotate(ghosts, n))
        scatter_add(res, mesh.bnd_cell,
                    mesh.bnd_length[:, None] * unrotate(without_pressure(F, inner[:, 0]), n))

    if interface is not None and interface.cell.size:
        scatter_add(res, interface.cell, interface.length[:, None] * interface.flux)

    return res


def check_depth(H, what='二维单元'):
    """舍入误差范围内的负水深置零，超出范围抛出 CFLViolationError"""
    scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
    bad = H < -NEGATIVE_DEPTH_TOLERANCE * scale
    if np.any(bad):
        cell = int(np.argmin(H))
        logger.error(f"{what} {cell} 出现负水深 {H[cell]:.3e}，时间步可能违反 CFL 条件")
        raise CFLViolationError(f"{what} {cell} 出现负水深 {H[cell]:.3e}", cell=cell, value=float(H[cell]))
    return np.maximum(H, 0.0)


def step_2d(mesh, U, dt, ghosts=None, interface=None, t=0.0):
    """
    二维显式更新一步

    参数:
        mesh: Mesh2D
        U: (N, 3) 单元平均状态
        dt: 时间步长（满足 CFL）
        ghosts: 边界虚拟状态，为 None 时按网格边界条件在 t 时刻生成
        interface: 一维/二维耦合边的通量贡献
        t: 当前时刻

    返回:
        新的 (N, 3) 状态
    """
    if ghosts is None:
        ghosts = boundary_ghosts(mesh, U, t)
    res = edge_residual(mesh, U, ghosts, interface)
    U_new = U - dt / mesh.area[:, None] * res
    U_new[:, 0] = check_depth(U_new[:, 0])
    U_new += friction_source_2d(U_new, mesh.manning_n, dt)

    dry = U_new[:, 0] <= DRY_DEPTH
    U_new[dry, 1:] = 0.0
    return U_new
