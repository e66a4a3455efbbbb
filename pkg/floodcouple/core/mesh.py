#!/usr/bin/env python3
"""
网格构建模块
----------
构建结构化二维漫滩网格块、一维河道网格（每个单元分成南北两个子单元），
以及一维单元与相邻二维单元之间的南/北边邻接关系。

二维网格块被展平为统一的单元/边数组（Mesh2D），求解器只面向这些数组：
  - 内部边：块内相邻单元之间，以及两个网格块的公共边（按区间重叠切分）
  - 边界边：未被其他网格块或河道覆盖的块边段，带边界条件
  - 耦合边：漫滩块与一维河道的公共边，由 EdgeAdjacency 描述
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from floodcouple.core.geometry import CrossSectionArray
from floodcouple.utils.errors import BoundaryError, MeshBuildError
from floodcouple.utils.logger import get_logger

logger = get_logger(__name__)

SIDES = ('south', 'north', 'west', 'east')
BOUNDARY_KINDS = ('wall', 'open', 'depth')

SIDE_NORMALS = {
    'south': (0.0, -1.0),
    'north': (0.0, 1.0),
    'west': (-1.0, 0.0),
    'east': (1.0, 0.0),
}

# 坐标比较容差（m）
COORD_TOL = 1e-9

BedFunction = Union[float, Callable]


@dataclass(frozen=True)
class BoundarySpec:
    """
    边界条件

    kind:
        wall  - 镜像内部状态并反号法向动量
        open  - 零梯度（复制内部状态）
        depth - 给定水深：恒定值 value，或正弦涨水过程 hydrograph = (eta0, r, a)
    """
    kind: str = 'wall'
    value: Optional[float] = None
    hydrograph: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in BOUNDARY_KINDS:
            raise BoundaryError(f"未知的边界类型: {self.kind}")
        if self.kind == 'depth' and self.value is None and self.hydrograph is None:
            raise BoundaryError("给定水深边界需要 value 或 hydrograph")
        if self.hydrograph is not None and len(self.hydrograph) != 3:
            raise BoundaryError("hydrograph 需要 (eta0, r, a) 三个参数")

    def depth_at(self, t):
        """
        t 时刻的边界水深

        正弦过程 h_b(t) = eta0 + r + r·sin((t - a)π / (2a))，t > 4a 后保持 h_b(4a)。
        """
        if self.hydrograph is None:
            return float(self.value)
        eta0, r, a = self.hydrograph
        t = min(t, 4.0 * a)
        return eta0 + r + r * math.sin((t - a) * math.pi / (2.0 * a))


WALL = BoundarySpec('wall')


def _evaluate_bed(bed, x, y=None):
    if callable(bed):
        value = bed(x) if y is None else bed(x, y)
        shape = np.shape(x) if y is None else np.broadcast(x, y).shape
        return np.broadcast_to(np.asarray(value, dtype=float), shape).copy()
    shape = np.shape(x) if y is None else np.broadcast(x, y).shape
    return np.full(shape, float(bed))


@dataclass
class Grid2D:
    """结构化二维网格块，bed 按 (ny, nx) 存储"""
    name: str
    nx: int
    ny: int
    dx: float
    dy: float
    origin: tuple
    bed: np.ndarray
    manning_n: float = 0.0
    boundary: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise MeshBuildError(f"网格块 {self.name} 单元数必须 ≥ 1: {self.nx}×{self.ny}")
        if not (self.dx > 0 and self.dy > 0):
            raise MeshBuildError(f"网格块 {self.name} 步长必须为正: dx={self.dx}, dy={self.dy}")
        self.bed = np.asarray(self.bed, dtype=float)
        if self.bed.shape != (self.ny, self.nx):
            raise MeshBuildError(
                f"网格块 {self.name} 高程数组形状 {self.bed.shape} 与 {self.ny}×{self.nx} 不符"
            )
        unknown = set(self.boundary) - set(SIDES)
        if unknown:
            raise MeshBuildError(f"网格块 {self.name} 存在未知边: {sorted(unknown)}")

    @classmethod
    def from_extent(cls, name, x0, x1, y0, y1, nx, ny, bed=0.0, manning_n=0.0, boundary=None):
        if nx < 1 or ny < 1:
            raise MeshBuildError(f"网格块 {name} 单元数必须 ≥ 1: {nx}×{ny}")
        if not (x1 > x0 and y1 > y0):
            raise MeshBuildError(f"网格块 {name} 范围无效: [{x0}, {x1}]×[{y0}, {y1}]")
        dx = (x1 - x0) / nx
        dy = (y1 - y0) / ny
        xc = x0 + (np.arange(nx) + 0.5) * dx
        yc = y0 + (np.arange(ny) + 0.5) * dy
        xx, yy = np.meshgrid(xc, yc)
        return cls(name, nx, ny, dx, dy, (x0, y0), _evaluate_bed(bed, xx, yy),
                   manning_n, dict(boundary or {}))

    @property
    def n_cells(self):
        return self.nx * self.ny

    @property
    def cell_area(self):
        return self.dx * self.dy

    @property
    def extent(self):
        x0, y0 = self.origin
        return x0, x0 + self.nx * self.dx, y0, y0 + self.ny * self.dy

    @property
    def x_faces(self):
        return self.origin[0] + np.arange(self.nx + 1) * self.dx

    @property
    def y_faces(self):
        return self.origin[1] + np.arange(self.ny + 1) * self.dy

    @property
    def x_centers(self):
        return self.origin[0] + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y_centers(self):
        return self.origin[1] + (np.arange(self.ny) + 0.5) * self.dy

    def boundary_spec(self, side):
        return self.boundary.get(side, WALL)

    def side_cells(self, side):
        """块边上的单元（块内局部展平索引）、边面坐标与法向"""
        ix = np.arange(self.nx)
        iy = np.arange(self.ny)
        if side == 'south':
            return ix, self.x_faces, SIDE_NORMALS[side]
        if side == 'north':
            return (self.ny - 1) * self.nx + ix, self.x_faces, SIDE_NORMALS[side]
        if side == 'west':
            return iy * self.nx, self.y_faces, SIDE_NORMALS[side]
        return iy * self.nx + self.nx - 1, self.y_faces, SIDE_NORMALS[side]

    def side_line(self, side):
        x0, x1, y0, y1 = self.extent
        return {'south': y0, 'north': y1, 'west': x0, 'east': x1}[side]


@dataclass
class ChannelGrid1D:
    """一维河道网格，河道轴线沿 x 方向，占据 [y_south, y_north] 条带"""
    x_faces: np.ndarray
    y_south: float
    y_north: float
    sections: CrossSectionArray
    boundary: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x_faces = np.asarray(self.x_faces, dtype=float)
        if np.any(np.diff(self.x_faces) <= 0):
            raise MeshBuildError("一维单元长度必须为正")
        if len(self.sections) != self.n_cells:
            raise MeshBuildError("断面数量与一维单元数不符")

    @property
    def n_cells(self):
        return self.x_faces.size - 1

    @property
    def x_centers(self):
        return 0.5 * (self.x_faces[:-1] + self.x_faces[1:])

    @property
    def dx(self):
        return np.diff(self.x_faces)

    @property
    def width(self):
        return self.sections.width

    @property
    def y_center(self):
        return 0.5 * (self.y_south + self.y_north)

    @property
    def subcell_area_north(self):
        return self.dx * self.width / 2.0

    @property
    def subcell_area_south(self):
        return self.dx * self.width / 2.0

    @property
    def edge_xb(self):
        """子单元上游边长 |e_xb|（半个河宽）"""
        return self.width / 2.0

    @property
    def edge_xf(self):
        return self.width / 2.0

    @property
    def edge_ns(self):
        """南北子单元公共边长 |e_NS| = Δx"""
        return self.dx

    def boundary_spec(self, side):
        return self.boundary.get(side, WALL)


@dataclass
class SideAdjacency:
    """一维单元某一侧（N 或 S）与二维漫滩单元的邻接边列表"""
    side: str
    normal: tuple
    channel_cell: np.ndarray
    floodplain_cell: np.ndarray
    length: np.ndarray
    side_length: np.ndarray

    @property
    def n_edges(self):
        return self.channel_cell.size

    def neighbors(self, i):
        """一维单元 i 在该侧的 (二维单元索引, 公共边长) 列表"""
        mask = self.channel_cell == i
        return list(zip(self.floodplain_cell[mask].tolist(), self.length[mask].tolist()))


@dataclass
class EdgeAdjacency:
    south: SideAdjacency
    north: SideAdjacency

    def side(self, name):
        return self.south if name == 'south' else self.north

    def sides(self):
        return (self.south, self.north)


@dataclass
class Mesh2D:
    """展平后的二维网格：单元数组 + 内部边 + 边界边"""
    blocks: list
    offsets: np.ndarray
    x: np.ndarray
    y: np.ndarray
    bed: np.ndarray
    area: np.ndarray
    manning_n: np.ndarray
    cell_size: np.ndarray
    edge_left: np.ndarray
    edge_right: np.ndarray
    edge_length: np.ndarray
    edge_normal: np.ndarray
    bnd_cell: np.ndarray
    bnd_length: np.ndarray
    bnd_normal: np.ndarray
    bnd_spec_id: np.ndarray
    bnd_specs: list

    @property
    def n_cells(self):
        return self.x.size

    def block(self, name):
        for grid, offset in zip(self.blocks, self.offsets):
            if grid.name == name:
                return grid, int(offset)
        raise KeyError(name)

    def locate(self, x, y):
        """返回包含点 (x, y) 的单元索引，不在任何网格块内时返回 None"""
        for grid, offset in zip(self.blocks, self.offsets):
            x0, x1, y0, y1 = grid.extent
            if x0 - COORD_TOL <= x <= x1 + COORD_TOL and y0 - COORD_TOL <= y <= y1 + COORD_TOL:
                ix = min(max(int((x - x0) / grid.dx), 0), grid.nx - 1)
                iy = min(max(int((y - y0) / grid.dy), 0), grid.ny - 1)
                return int(offset) + iy * grid.nx + ix
        return None


@dataclass
class ChannelSpec:
    """河道描述：x 方向直河道，占据 [x0, x1]×[y_south, y_north]"""
    x0: float
    x1: float
    y_south: float
    y_north: float
    cells: int
    lateral_cells: int = 1
    bed: BedFunction = 0.0
    manning_n: float = 0.0
    bank_south: Optional[Callable] = None
    bank_north: Optional[Callable] = None
    boundary: dict = field(default_factory=dict)


@dataclass
class FloodplainSpec:
    name: str
    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int
    bed: BedFunction = 0.0
    manning_n: float = 0.0
    boundary: dict = field(default_factory=dict)


@dataclass
class DomainSpec:
    channel: ChannelSpec
    floodplains: list = field(default_factory=list)


@dataclass
class CoupledMesh:
    """
    完整计算网格

    耦合模式下 channel/adjacency 非空，mesh2d 只含漫滩；
    全二维模式下河道作为名为 'channel' 的二维网格块并入 mesh2d。
    """
    blocks: list
    mesh2d: Mesh2D
    channel: Optional[ChannelGrid1D] = None
    adjacency: Optional[EdgeAdjacency] = None

    @property
    def coupled(self):
        return self.channel is not None


def _overlaps(faces_a, faces_b):
    """两组单调网格面之间的重叠区间 -> [(ia, ib, length)]"""
    result = []
    ia = ib = 0
    while ia < faces_a.size - 1 and ib < faces_b.size - 1:
        lo = max(faces_a[ia], faces_b[ib])
        hi = min(faces_a[ia + 1], faces_b[ib + 1])
        if hi - lo > COORD_TOL:
            result.append((ia, ib, hi - lo))
        if faces_a[ia + 1] <= faces_b[ib + 1]:
            ia += 1
        else:
            ib += 1
    return result


def _rectangles_overlap(a, b):
    ax0, ax1, ay0, ay1 = a
    bx0, bx1, by0, by1 = b
    return (min(ax1, bx1) - max(ax0, bx0) > COORD_TOL
            and min(ay1, by1) - max(ay0, by0) > COORD_TOL)


def side_normal(channel, i, side):
    """
    一维单元 i 的侧边单位外法向

    直河道南侧为 (0, -1)，北侧为 (0, +1)。
    """
    if not 0 <= i < channel.n_cells:
        raise IndexError(f"一维单元索引越界: {i}")
    if side not in ('south', 'north'):
        raise MeshBuildError(f"河道只有 south/north 两侧: {side}")
    return SIDE_NORMALS[side]


def split_subcells(channel, i):
    """一维单元沿中线等分为北、南子单元，返回 (|K_i^N|, |K_i^S|)"""
    area = channel.dx[i] * channel.width[i]
    return area / 2.0, area / 2.0


def _channel_block(spec):
    width = spec.y_north - spec.y_south
    dx = (spec.x1 - spec.x0) / spec.cells
    xc = spec.x0 + (np.arange(spec.cells) + 0.5) * dx
    bed = np.broadcast_to(_evaluate_bed(spec.bed, xc), (spec.lateral_cells, spec.cells)).copy()
    return Grid2D('channel', spec.cells, spec.lateral_cells, dx, width / spec.lateral_cells,
                  (spec.x0, spec.y_south), bed, spec.manning_n,
                  {side: spec.boundary.get(side, WALL) for side in ('west', 'east')})


def _flatten(blocks, channel_lines):
    """把网格块展平并生成内部边与边界边；channel_lines 为被河道占用的块边段"""
    offsets = np.cumsum([0] + [g.n_cells for g in blocks[:-1]]).astype(int)
    xs, ys, beds, areas, mannings, sizes = [], [], [], [], [], []
    left, right, length, normal = [], [], [], []

    for grid, off in zip(blocks, offsets):
        xx, yy = np.meshgrid(grid.x_centers, grid.y_centers)
        xs.append(xx.ravel())
        ys.append(yy.ravel())
        beds.append(grid.bed.ravel())
        areas.append(np.full(grid.n_cells, grid.cell_area))
        mannings.append(np.full(grid.n_cells, grid.manning_n))
        sizes.append(np.full(grid.n_cells, min(grid.dx, grid.dy)))

        idx = off + np.arange(grid.n_cells).reshape(grid.ny, grid.nx)
        # x 方向内部边
        l = idx[:, :-1].ravel()
        left.append(l)
        right.append(idx[:, 1:].ravel())
        length.append(np.full(l.size, grid.dy))
        normal.append(np.tile([1.0, 0.0], (l.size, 1)))
        # y 方向内部边
        l = idx[:-1, :].ravel()
        left.append(l)
        right.append(idx[1:, :].ravel())
        length.append(np.full(l.size, grid.dx))
        normal.append(np.tile([0.0, 1.0], (l.size, 1)))

    coverage = {(b, side): np.zeros(blocks[b].nx if side in ('south', 'north') else blocks[b].ny)
                for b in range(len(blocks)) for side in SIDES}

    # 网格块之间的公共边：a 的 north/east 对 b 的 south/west
    for a, ga in enumerate(blocks):
        for side_a, side_b in (('north', 'south'), ('east', 'west')):
            cells_a, faces_a, n = ga.side_cells(side_a)
            for b, gb in enumerate(blocks):
                if a == b or abs(ga.side_line(side_a) - gb.side_line(side_b)) > COORD_TOL:
                    continue
                cells_b, faces_b, _ = gb.side_cells(side_b)
                for ia, ib, seg in _overlaps(faces_a, faces_b):
                    left.append([offsets[a] + cells_a[ia]])
                    right.append([offsets[b] + cells_b[ib]])
                    length.append([seg])
                    normal.append([n])
                    coverage[(a, side_a)][ia] += seg
                    coverage[(b, side_b)][ib] += seg

    for (b, side), faces, cover in channel_lines:
        coverage[(b, side)] += cover

    bnd_cell, bnd_length, bnd_normal, bnd_spec_id, bnd_specs = [], [], [], [], []
    for b, grid in enumerate(blocks):
        for side in SIDES:
            cells, faces, n = grid.side_cells(side)
            remaining = np.diff(faces) - coverage[(b, side)]
            if np.any(remaining < -COORD_TOL):
                raise MeshBuildError(f"网格块 {grid.name} 的 {side} 边被重复覆盖")
            keep = remaining > COORD_TOL
            if not np.any(keep):
                continue
            bnd_specs.append(grid.boundary_spec(side))
            bnd_cell.append(offsets[b] + cells[keep])
            bnd_length.append(remaining[keep])
            bnd_normal.append(np.tile(n, (int(keep.sum()), 1)))
            bnd_spec_id.append(np.full(int(keep.sum()), len(bnd_specs) - 1))

    def cat(parts, dtype=float, width=None):
        if not parts:
            return np.zeros((0, width) if width else 0, dtype=dtype)
        return np.concatenate([np.asarray(p, dtype=dtype).reshape((-1, width) if width else -1)
                               for p in parts])

    return Mesh2D(
        blocks=list(blocks), offsets=offsets,
        x=cat(xs), y=cat(ys), bed=cat(beds), area=cat(areas),
        manning_n=cat(mannings), cell_size=cat(sizes),
        edge_left=cat(left, int), edge_right=cat(right, int),
        edge_length=cat(length), edge_normal=cat(normal, width=2),
        bnd_cell=cat(bnd_cell, int), bnd_length=cat(bnd_length),
        bnd_normal=cat(bnd_normal, width=2), bnd_spec_id=cat(bnd_spec_id, int),
        bnd_specs=bnd_specs,
    )


def _side_adjacency(side, channel, blocks, offsets, channel_lines):
    """河道一侧与漫滩块的重叠边；顺带记录被占用的漫滩块边段"""
    line = channel.y_south if side == 'south' else channel.y_north
    block_side = 'north' if side == 'south' else 'south'
    ch_cells, fp_cells, lengths = [], [], []
    for b, grid in enumerate(blocks):
        if abs(grid.side_line(block_side) - line) > COORD_TOL:
            continue
        cells, faces, _ = grid.side_cells(block_side)
        cover = np.zeros(cells.size)
        for i, j, seg in _overlaps(channel.x_faces, faces):
            ch_cells.append(i)
            fp_cells.append(offsets[b] + cells[j])
            lengths.append(seg)
            cover[j] += seg
        channel_lines.append(((b, block_side), faces, cover))

    ch_cells = np.asarray(ch_cells, dtype=int)
    lengths = np.asarray(lengths, dtype=float)
    normal = SIDE_NORMALS[side]
    if normal[1] == 0:
        raise MeshBuildError("河道侧边法向 n^y 不能为 0")
    return SideAdjacency(
        side=side,
        normal=normal,
        channel_cell=ch_cells,
        floodplain_cell=np.asarray(fp_cells, dtype=int),
        length=lengths,
        side_length=np.bincount(ch_cells, weights=lengths, minlength=channel.n_cells),
    )


def _bank(bank, x_centers, adjacency, bed2d, bed1d):
    """岸顶高程：显式给定，或取相邻漫滩单元的最高河床，无漫滩一侧为封闭高墙"""
    if bank is not None:
        return np.maximum(_evaluate_bed(bank, x_centers), bed1d)
    result = np.full(x_centers.size, np.inf)
    if adjacency.n_edges:
        result[adjacency.channel_cell] = -np.inf
        np.maximum.at(result, adjacency.channel_cell, bed2d[adjacency.floodplain_cell])
    return np.maximum(result, bed1d)


def build_mesh(domain, full2d=False):
    """
    构建计算网格

    参数:
        domain: DomainSpec，河道与漫滩块描述
        full2d: True 时把河道也剖分为二维网格块（全二维参考模式）

    返回:
        CoupledMesh，包含网格块列表、一维河道网格与南北邻接关系
    """
    ch = domain.channel
    if not (ch.x1 > ch.x0 and ch.y_north > ch.y_south):
        raise MeshBuildError("河道范围无效")
    if ch.cells < 1 or ch.lateral_cells < 1:
        raise MeshBuildError("河道单元数必须 ≥ 1")

    blocks = [Grid2D.from_extent(fp.name, fp.x0, fp.x1, fp.y0, fp.y1, fp.nx, fp.ny,
                                 fp.bed, fp.manning_n, fp.boundary)
              for fp in domain.floodplains]
    channel_rect = (ch.x0, ch.x1, ch.y_south, ch.y_north)
    for i, a in enumerate(blocks):
        if _rectangles_overlap(a.extent, channel_rect):
            raise MeshBuildError(f"漫滩块 {a.name} 与河道区域重叠")
        for b in blocks[i + 1:]:
            if _rectangles_overlap(a.extent, b.extent):
                raise MeshBuildError(f"网格块 {a.name} 与 {b.name} 重叠")

    if full2d:
        blocks = blocks + [_channel_block(ch)]
        mesh2d = _flatten(blocks, [])
        logger.info(f"全二维网格: {len(blocks)} 个网格块, {mesh2d.n_cells} 个单元")
        return CoupledMesh(blocks=blocks, mesh2d=mesh2d)

    x_faces = np.linspace(ch.x0, ch.x1, ch.cells + 1)
    x_centers = 0.5 * (x_faces[:-1] + x_faces[1:])
    bed1d = _evaluate_bed(ch.bed, x_centers)
    offsets = np.cumsum([0] + [g.n_cells for g in blocks[:-1]]).astype(int)
    bed2d = np.concatenate([g.bed.ravel() for g in blocks]) if blocks else np.zeros(0)

    # 先用占位断面建立网格，以便计算邻接
    width = ch.y_north - ch.y_south
    placeholder = CrossSectionArray(bed1d, np.full(ch.cells, width), bed1d, bed1d,
                                    np.full(ch.cells, ch.manning_n))
    channel = ChannelGrid1D(x_faces, ch.y_south, ch.y_north, placeholder,
                            {side: ch.boundary.get(side, WALL) for side in ('west', 'east')})

    channel_lines = []
    south = _side_adjacency('south', channel, blocks, offsets, channel_lines)
    north = _side_adjacency('north', channel, blocks, offsets, channel_lines)

    channel.sections = CrossSectionArray(
        bed_elevation=bed1d,
        width=np.full(ch.cells, width),
        bank_left=_bank(ch.bank_south, x_centers, south, bed2d, bed1d),
        bank_right=_bank(ch.bank_north, x_centers, north, bed2d, bed1d),
        manning_n=np.full(ch.cells, ch.manning_n),
    )
    mesh2d = _flatten(blocks, channel_lines)
    logger.info(
        f"耦合网格: 漫滩 {mesh2d.n_cells} 个单元, 河道 {channel.n_cells} 个单元, "
        f"南侧 {south.n_edges} / 北侧 {north.n_edges} 条耦合边"
    )
    return CoupledMesh(blocks=blocks, mesh2d=mesh2d, channel=channel,
                       adjacency=EdgeAdjacency(south=south, north=north))
