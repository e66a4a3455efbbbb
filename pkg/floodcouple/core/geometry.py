#!/usr/bin/env python3
"""
河道断面几何模块
-------------
矩形断面（垂直边墙）的宽度函数、墙顶高程、面积/水深换算、
湿周、输水能力与摩阻坡度。

所有函数对标量和 numpy 数组同样适用：断面参数可以是单个
ChannelCrossSection，也可以是逐单元的 CrossSectionArray。
"""

from dataclasses import dataclass

import numpy as np

from floodcouple.utils.errors import GeometryError

# Manning 公式指数：K = A^k1 / (n P^k2)
K1 = 5.0 / 3.0
K2 = 2.0 / 3.0


@dataclass(frozen=True)
class ChannelCrossSection:
    """
    矩形河道断面

    bank_left 为南岸（y 较小一侧，法向 n_S），bank_right 为北岸。
    没有漫滩相邻的一侧用 inf 表示封闭高墙。
    """
    bed_elevation: float
    width: float
    bank_left: float
    bank_right: float
    manning_n: float = 0.0

    def __post_init__(self):
        if not self.width > 0:
            raise GeometryError(f"断面宽度必须为正: B = {self.width}")
        if self.bank_left < self.bed_elevation or self.bank_right < self.bed_elevation:
            raise GeometryError(
                f"岸顶高程低于河底: z_bl = {self.bank_left}, z_br = {self.bank_right}, "
                f"Z_b = {self.bed_elevation}"
            )
        if self.manning_n < 0:
            raise GeometryError(f"糙率不能为负: n = {self.manning_n}")


@dataclass
class CrossSectionArray:
    """逐单元的断面参数数组，字段名与 ChannelCrossSection 一致"""
    bed_elevation: np.ndarray
    width: np.ndarray
    bank_left: np.ndarray
    bank_right: np.ndarray
    manning_n: np.ndarray

    def __post_init__(self):
        for name in ('bed_elevation', 'width', 'bank_left', 'bank_right', 'manning_n'):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if np.any(self.width <= 0):
            raise GeometryError("断面宽度必须为正")
        if np.any(self.bank_left < self.bed_elevation) or np.any(self.bank_right < self.bed_elevation):
            raise GeometryError("岸顶高程低于河底")
        if np.any(self.manning_n < 0):
            raise GeometryError("糙率不能为负")

    @classmethod
    def from_sections(cls, sections):
        sections = list(sections)
        return cls(
            bed_elevation=[cs.bed_elevation for cs in sections],
            width=[cs.width for cs in sections],
            bank_left=[cs.bank_left for cs in sections],
            bank_right=[cs.bank_right for cs in sections],
            manning_n=[cs.manning_n for cs in sections],
        )

    def __len__(self):
        return self.width.size

    def __getitem__(self, i):
        return ChannelCrossSection(
            bed_elevation=float(self.bed_elevation[i]),
            width=float(self.width[i]),
            bank_left=float(self.bank_left[i]),
            bank_right=float(self.bank_right[i]),
            manning_n=float(self.manning_n[i]),
        )


@dataclass
class SectionState:
    """断面守恒量：过水面积 A 与流量 Q"""
    area: float
    discharge: float

    def __post_init__(self):
        if self.area < 0:
            raise GeometryError(f"过水面积不能为负: A = {self.area}")
        if not np.isfinite(self.discharge):
            raise GeometryError(f"流量必须有限: Q = {self.discharge}")

    @property
    def velocity(self):
        return self.discharge / self.area if self.area > 0 else 0.0

    def depth(self, cs):
        return depth_from_area(cs, self.area)

    def eta(self, cs):
        return cs.bed_elevation + self.depth(cs)


def _result(value):
    """0 维数组还原为 Python float"""
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


def wall_elevation(cs):
    """墙顶高程 z_b^w = min(z_bl, z_br)，即漫溢阈值"""
    return _result(np.minimum(cs.bank_left, cs.bank_right))


def wetted_area(cs, depth):
    """
    过水面积 A = B·h

    参数:
        cs: 断面
        depth: 断面平均水深 h（m），不能为负

    返回:
        过水面积（m²）
    """
    depth = np.asarray(depth, dtype=float)
    if np.any(depth < 0):
        raise GeometryError(f"水深不能为负: {depth.min()}")
    return _result(np.asarray(cs.width) * depth)


def depth_from_area(cs, area):
    """水深 h = A/B，wetted_area 的逆运算"""
    area = np.asarray(area, dtype=float)
    if np.any(area < 0):
        raise GeometryError(f"过水面积不能为负: {area.min()}")
    return _result(area / np.asarray(cs.width))


def top_width(cs, elevation):
    """
    水面宽 B(x, η)

    河底以下为 0；河底以上为 B（垂直边墙），墙顶以上保持 B(x, z_b^w)。
    """
    elevation = np.asarray(elevation, dtype=float)
    width = np.broadcast_to(np.asarray(cs.width, dtype=float), elevation.shape)
    return _result(np.where(elevation < np.asarray(cs.bed_elevation), 0.0, width))


def wetted_perimeter(cs, area):
    """湿周 P = B + 2A/B"""
    width = np.asarray(cs.width, dtype=float)
    return _result(width + 2.0 * np.asarray(area, dtype=float) / width)


def conveyance(cs, area):
    """
    输水能力 K = A^(5/3) / (n P^(2/3))

    约定 K(0) = 0；n = 0（无摩阻）时返回 inf。
    """
    area = np.asarray(area, dtype=float)
    n = np.broadcast_to(np.asarray(cs.manning_n, dtype=float), area.shape)
    perimeter = np.asarray(wetted_perimeter(cs, area))
    with np.errstate(divide='ignore', invalid='ignore'):
        k = np.where(n > 0, area ** K1 / (n * perimeter ** K2), np.inf)
    return _result(np.where(area > 0, k, 0.0))


def friction_slope(cs, area, discharge):
    """
    摩阻坡度 S_f = Q|Q| / K²

    干断面（A = 0）上 Q 必须为 0，否则抛出 GeometryError。
    """
    area = np.asarray(area, dtype=float)
    discharge = np.asarray(discharge, dtype=float)
    dry = area <= 0
    if np.any(dry & (discharge != 0)):
        raise GeometryError("干断面上存在非零流量，无法计算摩阻坡度")
    k = np.asarray(conveyance(cs, np.where(dry, 1.0, area)))
    with np.errstate(divide='ignore', invalid='ignore'):
        sf = discharge * np.abs(discharge) / k ** 2
    return _result(np.where(dry, 0.0, sf))
