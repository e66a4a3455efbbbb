#!/usr/bin/env python3
"""
溃坝解析解模块
-----------
湿底、无摩阻一维溃坝的 Stoker 解析解：左侧稀疏波 + 中间常数状态 + 右行激波。
用作一维和二维求解器的验证基准。
"""

import numpy as np
from scipy.optimize import brentq

from floodcouple.config.settings import GRAVITY
from floodcouple.utils.errors import GeometryError


def stoker_middle_state(h_left, h_right):
    """
    中间状态 (h_m, u_m)

    h_m 满足 2(√(g h_l) - √(g h_m)) = (h_m - h_r)·√(g/2·(1/h_m + 1/h_r))

    参数:
        h_left: 坝上游水深（m）
        h_right: 坝下游水深（m），必须为正

    返回:
        (h_m, u_m)
    """
    if h_right <= 0:
        raise GeometryError(f"下游水深必须为正（湿底溃坝）: {h_right}")
    if h_left <= h_right:
        raise GeometryError(f"上游水深必须大于下游水深: {h_left} <= {h_right}")

    c_left = np.sqrt(GRAVITY * h_left)

    def residual(h):
        rarefaction = 2.0 * (c_left - np.sqrt(GRAVITY * h))
        shock = (h - h_right) * np.sqrt(0.5 * GRAVITY * (1.0 / h + 1.0 / h_right))
        return rarefaction - shock

    h_m = brentq(residual, h_right, h_left, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    u_m = 2.0 * (c_left - np.sqrt(GRAVITY * h_m))
    return float(h_m), float(u_m)


def stoker_solution(x, t, x_dam, h_left, h_right):
    """
    t 时刻的解析水深和流速

    返回:
        (h, u) 两个与 x 同形状的数组；t = 0 时返回初始阶跃
    """
    x = np.asarray(x, dtype=float)
    if t <= 0:
        h = np.where(x <= x_dam, h_left, h_right)
        return h, np.zeros_like(x)

    h_m, u_m = stoker_middle_state(h_left, h_right)
    c_left = np.sqrt(GRAVITY * h_left)
    c_m = np.sqrt(GRAVITY * h_m)
    s = h_m * u_m / (h_m - h_right)

    xi = (x - x_dam) / t
    h = np.full_like(x, h_right)
    u = np.zeros_like(x)

    left = xi <= -c_left
    fan = (xi > -c_left) & (xi <= u_m - c_m)
    middle = (xi > u_m - c_m) & (xi <= s)

    h[left] = h_left
    h[fan] = (2.0 * c_left - xi[fan]) ** 2 / (9.0 * GRAVITY)
    u[fan] = 2.0 / 3.0 * (xi[fan] + c_left)
    h[middle] = h_m
    u[middle] = u_m
    return h, u


def l1_depth_error(x, h_numeric, t, x_dam, h_left, h_right, dx=None):
    """
    数值解与解析解的 L1 水深误差（按单元长度加权的平均绝对误差，m）
    """
    x = np.asarray(x, dtype=float)
    h_exact, _ = stoker_solution(x, t, x_dam, h_left, h_right)
    weight = np.ones_like(x) if dx is None else np.broadcast_to(np.asarray(dx, dtype=float), x.shape)
    return float(np.sum(np.abs(np.asarray(h_numeric) - h_exact) * weight) / np.sum(weight))
