#!/usr/bin/env python3
"""
异常定义
-------
数值内核抛出异常，命令行入口统一捕获 FloodCoupleError 并返回非零退出码。
"""


class FloodCoupleError(Exception):
    """所有项目异常的基类"""


class GeometryError(FloodCoupleError, ValueError):
    """断面参数无效、负水深/负面积、干断面摩阻"""


class MeshBuildError(FloodCoupleError):
    """网格范围无效、网格块重叠、河道侧边法向 n^y = 0"""


class DryStateError(FloodCoupleError, ValueError):
    """干单元（H = 0）携带非零流量"""


class BoundaryError(FloodCoupleError, ValueError):
    """未知的边界类型"""


class CFLViolationError(FloodCoupleError):
    """更新后出现负水深或负面积，通常由时间步过大引起"""

    def __init__(self, message, cell=None, value=None):
        super().__init__(message)
        self.cell = cell
        self.value = value


class ConfigError(FloodCoupleError):
    """配置文件解析错误，带键名和行号"""

    def __init__(self, message, key=None, line=None):
        if line is not None:
            message = f"第 {line} 行: {message}"
        super().__init__(message)
        self.key = key
        self.line = line
