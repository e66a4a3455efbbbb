#!/usr/bin/env python3
"""
模拟驱动模块
----------
按 HCM 流程推进时间步：CFL 步长、边界条件、耦合通量、二维更新、
一维更新、耦合项、侧向流量，以及测点采样和水量诊断。

三种运行模式：
  full2d - 河道也剖分为二维网格，只运行二维求解器
  hcm    - 一维河道 + 二维漫滩 + 侧向流量
  fbm    - 与 hcm 相同但侧向流量恒为 0
"""

import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from floodcouple.config.settings import (
    DEFAULT_CFL,
    DEFAULT_MAX_STEPS,
    DEFAULT_PROBE_INTERVAL,
    DRY_DEPTH,
    FALLBACK_DT,
    GRAVITY,
)
from floodcouple.core.coupling import CouplingTerm, apply_coupling, compute_coupling, fbm_coupling
from floodcouple.core.lateral import init_lateral, lateral_velocity, step_lateral
from floodcouple.core.mesh import BOUNDARY_KINDS, DomainSpec, build_mesh
from floodcouple.core.solver1d import ghost_states, step_1d
from floodcouple.core.solver2d import boundary_ghosts, step_2d
from floodcouple.utils.errors import BoundaryError, FloodCoupleError
from floodcouple.utils.logger import get_logger

logger = get_logger(__name__)

MODES = ('full2d', 'hcm', 'fbm')

# 每隔多少步输出一次调试日志
LOG_EVERY = 500


@dataclass(frozen=True)
class Probe:
    name: str
    x: float
    y: float


@dataclass
class InitialCondition:
    """
    初始条件

    channel_depth(x, zb) 给出河道水深，floodplain_depth(x, y, zb) 给出漫滩水深，
    初始流速全部为 0。
    """
    channel_depth: Callable
    floodplain_depth: Callable
    lateral_discharge: float = 0.0


@dataclass
class SimConfig:
    """一次模拟运行的全部配置"""
    mode: str
    end_time: float
    domain: DomainSpec
    initial: InitialCondition
    cfl: float = DEFAULT_CFL
    probes: list = field(default_factory=list)
    probe_interval: float = DEFAULT_PROBE_INTERVAL
    snapshot_times: tuple = ()
    max_steps: int = DEFAULT_MAX_STEPS
    lateral: bool = True
    name: str = ''

    def __post_init__(self):
        if self.mode not in MODES:
            raise FloodCoupleError(f"未知的运行模式: {self.mode}")
        if not 0 < self.cfl <= 1:
            raise FloodCoupleError(f"CFL 数必须在 (0, 1] 内: {self.cfl}")
        if self.end_time < 0:
            raise FloodCoupleError(f"结束时间不能为负: {self.end_time}")
        if self.probe_interval <= 0:
            raise FloodCoupleError(f"采样间隔必须为正: {self.probe_interval}")


class ProbeSample(NamedTuple):
    probe_id: str
    eta: float
    H: float
    u: float
    v: float


@dataclass
class ProbeRecord:
    time: float
    samples: list


@dataclass
class SimState:
    """t 时刻的全部场变量；非耦合模式下一维数组为空"""
    t: float
    step: int
    U: np.ndarray
    A: np.ndarray
    Q: np.ndarray
    qN: np.ndarray
    qS: np.ndarray

    def copy(self):
        return SimState(self.t, self.step, self.U.copy(), self.A.copy(), self.Q.copy(),
                        self.qN.copy(), self.qS.copy())


@dataclass
class BoundaryGhosts:
    """二维边界边的虚拟状态与河道两端虚拟单元"""
    ghost_2d: np.ndarray
    channel_ends: Optional[tuple] = None


@dataclass
class RunResult:
    state: SimState
    records: list
    steps: int
    wall_time: float
    volumes: list = field(default_factory=list)
    max_coupling: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)


def channel_area(h, width, max_nudges=4):
    """
    由水深求断面面积 A = B·h，并按 ulp 微调使 A/B 严格还原 h

    静水初值下 h̄ = A/B 与漫滩水深取自同一水位，逐位相等时耦合项才严格为 0。
    """
    h = np.asarray(h, dtype=float)
    width = np.asarray(width, dtype=float)
    A = width * h
    for _ in range(max_nudges):
        back = A / width
        off = back != h
        if not np.any(off):
            break
        A = np.where(off, np.nextafter(A, np.where(back < h, np.inf, -np.inf)), A)
    return A


def initial_state(mesh, initial):
    """按初始条件生成 t = 0 的 SimState"""
    m2 = mesh.mesh2d
    U = np.zeros((m2.n_cells, 3))
    for grid, offset in zip(m2.blocks, m2.offsets):
        sl = slice(int(offset), int(offset) + grid.n_cells)
        if grid.name == 'channel':
            H = initial.channel_depth(m2.x[sl], m2.bed[sl])
        else:
            H = initial.floodplain_depth(m2.x[sl], m2.y[sl], m2.bed[sl])
        U[sl, 0] = np.maximum(np.broadcast_to(np.asarray(H, dtype=float), m2.x[sl].shape), 0.0)

    if not mesh.coupled:
        empty = np.zeros(0)
        return SimState(0.0, 0, U, empty, empty.copy(), empty.copy(), empty.copy())

    ch = mesh.channel
    h = np.asarray(initial.channel_depth(ch.x_centers, ch.sections.bed_elevation), dtype=float)
    A = channel_area(np.maximum(np.broadcast_to(h, ch.x_centers.shape), 0.0), ch.width)
    qN, qS = init_lateral(np.full(ch.n_cells, float(initial.lateral_discharge)))
    dry = A <= DRY_DEPTH * ch.width
    qN[dry] = 0.0
    qS[dry] = 0.0
    return SimState(0.0, 0, U, A, np.zeros(ch.n_cells), qN, qS)


def cfl_dt(mesh, state, cfl=DEFAULT_CFL, include_subcells=True):
    """
    CFL 时间步长

    dt = CFL·min(单元尺度 / (|u| + c))，只统计湿单元：
      二维单元  尺度 min(dx, dy)，速度 √(u² + v²) + √(gH)
      一维单元  尺度 Δx，速度 |ū| + √(gA/B)
      子单元    尺度 min(Δx, B/2)，速度 √(ū² + v²) + √(gA/B)
    全域无湿单元时返回 FALLBACK_DT。
    """
    candidates = []
    m2 = mesh.mesh2d
    H = state.U[:, 0]
    wet = H > DRY_DEPTH
    if np.any(wet):
        Hw = H[wet]
        speed = np.hypot(state.U[wet, 1], state.U[wet, 2]) / Hw + np.sqrt(GRAVITY * Hw)
        candidates.append(np.min(m2.cell_size[wet] / speed))

    if mesh.coupled and state.A.size:
        ch = mesh.channel
        B = ch.width
        wet = state.A > DRY_DEPTH * B
        if np.any(wet):
            A = state.A[wet]
            u = state.Q[wet] / A
            c = np.sqrt(GRAVITY * A / B[wet])
            candidates.append(np.min(ch.dx[wet] / (np.abs(u) + c)))
            if include_subcells:
                size = np.minimum(ch.dx[wet], B[wet] / 2.0)
                for q in (state.qN, state.qS):
                    v = lateral_velocity(A, q[wet], B[wet])
                    candidates.append(np.min(size / (np.hypot(u, v) + c)))

    if not candidates:
        logger.warning(f"全域无湿单元，使用默认时间步 {FALLBACK_DT}")
        return FALLBACK_DT
    return cfl * float(min(candidates))


def apply_boundaries(mesh, state, t):
    """
    生成 t 时刻的边界虚拟状态

    wall 镜像并反号法向动量；open 零梯度；depth 取 h_b(t)。
    """
    specs = list(mesh.mesh2d.bnd_specs)
    if mesh.coupled:
        specs += [mesh.channel.boundary_spec(side) for side in ('west', 'east')]
    for spec in specs:
        if spec.kind not in BOUNDARY_KINDS:
            raise BoundaryError(f"未知的边界类型: {spec.kind}")

    ghost_2d = boundary_ghosts(mesh.mesh2d, state.U, t)
    channel_ends = None
    if mesh.coupled:
        channel_ends = ghost_states(mesh.channel, state.A, state.Q, t)
    return BoundaryGhosts(ghost_2d, channel_ends)


def advance(mesh, state, dt, mode, lateral=True):
    """
    推进一步

    耦合模式下：(1) 由 n 时刻数据计算全部耦合边通量与 Φ；(2) 含界面通量的二维更新；
    (3) 一维更新得到 w*；(4) 加耦合项得到 w^{n+1}；(5) 侧向流量更新（仅 hcm）。

    返回:
        (新的 SimState, CouplingTerm)
    """
    t = state.t
    ghosts = apply_boundaries(mesh, state, t)

    if mode == 'full2d':
        U = step_2d(mesh.mesh2d, state.U, dt, ghosts=ghosts.ghost_2d, t=t)
        new = SimState(t + dt, state.step + 1, U, state.A, state.Q, state.qN, state.qS)
        return new, CouplingTerm.zeros(0)

    ch, adj, m2 = mesh.channel, mesh.adjacency, mesh.mesh2d
    if mode == 'fbm':
        coupling = fbm_coupling(ch, adj, state.A, state.Q, m2, state.U)
    else:
        coupling = compute_coupling(ch, adj, state.A, state.Q, state.qN, state.qS, m2, state.U)

    U = step_2d(m2, state.U, dt, ghosts=ghosts.ghost_2d, interface=coupling.interface, t=t)
    w_star = step_1d(ch, state.A, state.Q, dt, t=t)
    w_new = apply_coupling(w_star, coupling.term, dt, ch)

    if mode == 'hcm' and lateral:
        qN, qS = step_lateral(ch, adj, state.A, state.Q, state.qN, state.qS, m2, state.U, dt, t=t)
    elif mode == 'fbm':
        qN, qS = np.zeros(ch.n_cells), np.zeros(ch.n_cells)
    else:
        qN, qS = state.qN.copy(), state.qS.copy()

    dry = w_new.area <= DRY_DEPTH * ch.width
    qN = np.where(dry, 0.0, qN)
    qS = np.where(dry, 0.0, qS)
    new = SimState(t + dt, state.step + 1, U, w_new.area, w_new.discharge, qN, qS)
    return new, coupling.term


def total_volume(mesh, state):
    """总水量 Σ H·|T| + Σ A·Δx（m³）"""
    volume = float(np.sum(state.U[:, 0] * mesh.mesh2d.area))
    if mesh.coupled and state.A.size:
        volume += float(np.sum(state.A * mesh.channel.dx))
    return volume


class Simulation:
    """一次模拟运行：网格、状态、测点与时间推进"""

    def __init__(self, config, mesh=None):
        """
        参数:
            config: SimConfig
            mesh: 可选的预先构建网格，为 None 时按 config.domain 构建
        """
        self.config = config
        self.mesh = mesh or build_mesh(config.domain, full2d=(config.mode == 'full2d'))
        self.state = initial_state(self.mesh, config.initial)
        self._targets = [self._locate_probe(p) for p in config.probes]

    def _locate_probe(self, probe):
        if self.mesh.coupled:
            ch = self.mesh.channel
            x0, x1 = ch.x_faces[0], ch.x_faces[-1]
            if x0 <= probe.x <= x1 and ch.y_south <= probe.y <= ch.y_north:
                i = min(int(np.searchsorted(ch.x_faces, probe.x, side='right')) - 1, ch.n_cells - 1)
                side = 'north' if probe.y >= ch.y_center else 'south'
                return ('1d', max(i, 0), side)
        cell = self.mesh.mesh2d.locate(probe.x, probe.y)
        if cell is None:
            logger.warning(f"测点 {probe.name} ({probe.x}, {probe.y}) 不在计算域内")
            return None
        return ('2d', cell)

    def sample(self, state=None):
        """对全部测点取所在单元的平均值，不修改状态"""
        state = state or self.state
        samples = []
        for probe, target in zip(self.config.probes, self._targets):
            if target is None:
                samples.append(ProbeSample(probe.name, np.nan, np.nan, np.nan, np.nan))
            elif target[0] == '2d':
                j = target[1]
                H, qx, qy = state.U[j]
                wet = H > DRY_DEPTH
                samples.append(ProbeSample(
                    probe.name, float(self.mesh.mesh2d.bed[j] + H), float(H),
                    float(qx / H) if wet else 0.0, float(qy / H) if wet else 0.0,
                ))
            else:
                _, i, side = target
                ch = self.mesh.channel
                B = float(ch.width[i])
                h = float(state.A[i]) / B
                wet = state.A[i] > DRY_DEPTH * B
                q = state.qN[i] if side == 'north' else state.qS[i]
                samples.append(ProbeSample(
                    probe.name, float(ch.sections.bed_elevation[i] + h), h,
                    float(state.Q[i] / state.A[i]) if wet else 0.0,
                    float(lateral_velocity(state.A[i], q, B)),
                ))
        return ProbeRecord(state.t, samples)

    def step(self, dt):
        self.state, term = advance(self.mesh, self.state, dt, self.config.mode,
                                   lateral=self.config.lateral)
        return term

    def run(self):
        """
        积分到结束时间

        返回:
            RunResult（最终状态、测点记录、步数、耗时、水量与耦合项历史、快照）
        """
        cfg = self.config
        mode = cfg.mode
        start = time.perf_counter()
        logger.info(f"开始模拟 {cfg.name or ''} 模式 {mode}，结束时间 {cfg.end_time} s，"
                    f"二维单元 {self.mesh.mesh2d.n_cells}，"
                    f"一维单元 {self.mesh.channel.n_cells if self.mesh.coupled else 0}")

        records = [self.sample()]
        volumes = [total_volume(self.mesh, self.state)]
        max_coupling = []
        snapshots = {}
        pending = sorted(float(t) for t in cfg.snapshot_times if 0 <= t <= cfg.end_time)
        while pending and pending[0] <= 0:
            snapshots[pending.pop(0)] = self.state.copy()
        next_probe = cfg.probe_interval

        while self.state.t < cfg.end_time:
            if self.state.step >= cfg.max_steps:
                raise FloodCoupleError(f"达到最大步数 {cfg.max_steps}，t = {self.state.t:.6g} s")
            dt = cfl_dt(self.mesh, self.state, cfg.cfl, include_subcells=(mode != 'full2d'))
            target = pending[0] if pending else cfg.end_time
            hit = dt >= target - self.state.t
            if hit:
                dt = target - self.state.t

            term = self.step(dt)
            if hit:
                self.state.t = target
            last = self.state.t >= cfg.end_time
            if pending and self.state.t >= pending[0]:
                snapshots[pending.pop(0)] = self.state.copy()
            max_coupling.append(term.max_abs())
            volumes.append(total_volume(self.mesh, self.state))

            if self.state.t >= next_probe or last:
                records.append(self.sample())
                while next_probe <= self.state.t:
                    next_probe += cfg.probe_interval

            if self.state.step % LOG_EVERY == 0:
                logger.debug(f"第 {self.state.step} 步 t = {self.state.t:.4f} s, "
                             f"dt = {dt:.3e} s, 总水量 {volumes[-1]:.6e} m³")

        wall = time.perf_counter() - start
        logger.info(f"模拟结束: 模式 {mode}，{self.state.step} 步，耗时 {wall:.2f} s")
        return RunResult(self.state, records, self.state.step, wall, volumes,
                         max_coupling, snapshots)


# 方便直接使用的函数
def run_simulation(config, mesh=None):
    """
    按配置运行一次模拟

    参数:
        config: SimConfig
        mesh: 可选的预先构建网格

    返回:
        RunResult
    """
    return Simulation(config, mesh=mesh).run()
