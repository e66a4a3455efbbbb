#!/usr/bin/env python3
"""
验证模块
-------
`floodcouple verify` 的检查集：数值通量的一致性、旋转变换、
一维/二维/耦合静水平衡、无数值漫溢、水量守恒、溃坝解析解对比，
以及 FBM 与关闭侧向流量的 HCM 逐步一致。

scale 控制算例网格的缩放系数（越小越快）。
"""

import time
from dataclasses import dataclass

import numpy as np

from floodcouple.config.settings import DRY_DEPTH
from floodcouple.core.cases import CaseSpec, LakeLevel, StepDepth, build_case
from floodcouple.core.mesh import BoundarySpec, ChannelSpec, DomainSpec, FloodplainSpec, build_mesh
from floodcouple.core.simulation import InitialCondition, Simulation, advance, cfl_dt, initial_state
from floodcouple.core.solver1d import step_1d
from floodcouple.core.solver2d import hll_flux, physical_flux_x, rotate, unrotate, wave_speeds
from floodcouple.core.stoker import l1_depth_error
from floodcouple.utils.errors import FloodCoupleError
from floodcouple.utils.logger import get_logger

logger = get_logger(__name__)

SAMPLES = 10_000
SEED = 20240601

# 溃坝对比参数
DAM_LEFT, DAM_RIGHT = 0.504, 0.003
DAM_LENGTH, DAM_X, DAM_TIME = 10.0, 5.0, 1.0
DAM_DX = 0.02
DAM_L1_LIMIT = 0.015
DAM_MIN_ORDER = 0.7


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _random_states(rng, n):
    H = rng.uniform(1e-3, 5.0, n)
    qx = rng.uniform(-5.0, 5.0, n)
    qy = rng.uniform(-5.0, 5.0, n)
    return np.stack([H, qx, qy], axis=-1)


def check_hll_consistency(scale=1.0):
    """φ(w, w) = F₁(w)，且 s_L ≤ s_R"""
    rng = np.random.default_rng(SEED)
    w = _random_states(rng, SAMPLES)
    F = physical_flux_x(w)
    err = np.max(np.abs(hll_flux(w, w) - F) / np.maximum(1.0, np.abs(F)))
    wR = _random_states(rng, SAMPLES)
    sL, sR = wave_speeds(w, wR)
    ordered = bool(np.all(sL <= sR))
    return err <= 1e-13 and ordered, f"max 相对误差 {err:.2e}, s_L ≤ s_R: {ordered}"


def check_rotation_roundtrip(scale=1.0):
    """T⁻¹(T w) = w，且 T 保持水深与动量模长"""
    rng = np.random.default_rng(SEED + 1)
    w = _random_states(rng, SAMPLES)
    theta = rng.uniform(0.0, 2.0 * np.pi, SAMPLES)
    n = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    r = rotate(w, n)
    err = np.max(np.abs(unrotate(r, n) - w))
    norm = np.max(np.abs(np.hypot(r[:, 1], r[:, 2]) - np.hypot(w[:, 1], w[:, 2])))
    return err <= 1e-13 and norm <= 1e-13, f"往返误差 {err:.2e}, 模长误差 {norm:.2e}"


def _bump(x):
    return 0.4 * np.exp(-((np.asarray(x) - 1.0) ** 2) / 0.1)


def _bump_2d(x, y):
    return 0.8 * np.exp(-((x - 1.2) ** 2 + (y - 0.5) ** 2) / 0.05) + 0.1 * y


def lake_at_rest_report(bed, H0, U, level):
    """
    静水检验的三项指标

    以初始水深区分湿单元与干单元（H ≤ DRY_DEPTH 为干）。

    返回:
        (湿单元 max|Δη|, max|q|, 干单元水深是否保持不变)
    """
    wet = H0 > DRY_DEPTH
    H = U[:, 0]
    deta = float(np.max(np.abs(bed[wet] + H[wet] - level), initial=0.0))
    q = float(np.max(np.abs(U[:, 1:]), initial=0.0))
    dry_ok = bool(np.array_equal(H[~wet], H0[~wet]))
    return deta, q, dry_ok


def check_well_balance_2d(scale=1.0, steps=200, level=0.6):
    """起伏河床（含露出水面的驼峰）上的静水在二维格式下保持不变"""
    n = max(8, int(round(40 * scale)))
    domain = DomainSpec(
        ChannelSpec(0.0, 2.0, 1.0, 1.5, cells=n, lateral_cells=max(2, n // 4), bed=_bump),
        [FloodplainSpec('floodplain', 0.0, 2.0, 0.0, 1.0, n, max(4, n // 2), bed=_bump_2d)],
    )
    mesh = build_mesh(domain, full2d=True)
    state = initial_state(mesh, InitialCondition(LakeLevel(level), LakeLevel(level)))
    H0 = state.U[:, 0].copy()
    for _ in range(steps):
        dt = cfl_dt(mesh, state)
        state, _ = advance(mesh, state, dt, 'full2d')
    deta, q, dry_ok = lake_at_rest_report(mesh.mesh2d.bed, H0, state.U, level)
    passed = deta <= 1e-10 and q <= 1e-12 and dry_ok
    return passed, f"max|Δη| {deta:.2e}, max|q| {q:.2e}, 干单元不变: {dry_ok}"


def check_well_balance_1d(scale=1.0, steps=200, level=0.6):
    """变河床一维河道的静水平衡"""
    n = max(10, int(round(100 * scale)))
    domain = DomainSpec(ChannelSpec(0.0, 2.0, 0.0, 0.5, cells=n, bed=_bump))
    mesh = build_mesh(domain)
    ch = mesh.channel
    area = ch.width * (level - ch.sections.bed_elevation)
    discharge = np.zeros(ch.n_cells)
    dt = 0.45 * float(np.min(ch.dx)) / np.sqrt(9.81 * level)
    for _ in range(steps):
        area, discharge = step_1d(ch, area, discharge, dt)
    deta = np.max(np.abs(ch.sections.bed_elevation + area / ch.width - level))
    q = np.max(np.abs(discharge))
    return deta <= 1e-10 and q <= 1e-12, f"max|Δη| {deta:.2e}, max|Q| {q:.2e}"


def check_coupled_well_balance(scale=0.25, steps=1000):
    """算例 2 几何上的静水（η = 1.6），HCM 模式下耦合项恒为 0"""
    level = 1.6
    sim = Simulation(build_case(CaseSpec(2, mode='hcm', scale=scale, lake_level=level, probes=[])))
    worst_phi = 0.0
    for _ in range(steps):
        dt = cfl_dt(sim.mesh, sim.state, sim.config.cfl)
        worst_phi = max(worst_phi, sim.step(dt).max_abs())
    st = sim.state
    m2, ch = sim.mesh.mesh2d, sim.mesh.channel
    deta = max(np.max(np.abs(m2.bed + st.U[:, 0] - level)),
               np.max(np.abs(ch.sections.bed_elevation + st.A / ch.width - level)))
    q = max(np.max(np.abs(st.U[:, 1:])), np.max(np.abs(st.Q)),
            np.max(np.abs(st.qN)), np.max(np.abs(st.qS)))
    passed = deta <= 1e-10 and q <= 1e-12 and worst_phi == 0.0
    return passed, f"max|Δη| {deta:.2e}, max|q| {q:.2e}, max|Φ| {worst_phi:.2e}"


def check_no_numerical_flooding(scale=0.25, end_time=100.0):
    """算例 3 入流恒定 0.08 m（低于墙顶）：整个 100 s 内漫滩保持严格干燥，Φ 恒为 0"""
    spec = CaseSpec(3, mode='hcm', scale=scale, end_time=end_time, probes=[],
                    boundary={'channel_west': BoundarySpec('depth', value=0.08)})
    config = build_case(spec)
    config.snapshot_times = ()
    result = Simulation(config).run()
    H = result.state.U[:, 0]
    worst_phi = max(result.max_coupling, default=0.0)
    passed = bool(np.all(H == 0.0)) and worst_phi == 0.0
    return passed, f"漫滩 max H {np.max(H):.2e}, max|Φ| {worst_phi:.2e}, {result.steps} 步"


def check_mass_conservation(scale=0.25, end_time=None):
    """
    算例 3 全封闭、河道初始水深 0.15 m：HCM 与 FBM 的总水量相对漂移

    end_time 为 None 时运行算例的完整时长（100 s）。
    """
    details, passed = [], True
    for mode in ('hcm', 'fbm'):
        spec = CaseSpec(3, mode=mode, scale=scale, end_time=end_time, probes=[],
                        channel_depth=0.15, boundary={'channel_west': BoundarySpec('wall')})
        config = build_case(spec)
        config.snapshot_times = ()
        result = Simulation(config).run()
        volumes = np.asarray(result.volumes)
        drift = float(np.max(np.abs(volumes - volumes[0])) / volumes[0])
        passed = passed and drift <= 1e-10
        details.append(f"{mode} 漂移 {drift:.2e}")
    return passed, ', '.join(details)


def _dam_domain(dx, lateral_cells=1):
    cells = int(round(DAM_LENGTH / dx))
    return DomainSpec(ChannelSpec(0.0, DAM_LENGTH, 0.0, 0.5, cells=cells,
                                  lateral_cells=lateral_cells, bed=0.0, manning_n=0.0))


def dam_break_error(dx, mode):
    """
    无摩阻湿底溃坝在 t = 1 s 的 L1 水深误差

    mode 为 'hcm' 时只用一维河道（无漫滩），为 'full2d' 时用 y 向均匀的二维网格。
    """
    depth = StepDepth(DAM_X, DAM_LEFT, DAM_RIGHT)
    if mode == 'full2d':
        mesh = build_mesh(_dam_domain(dx, lateral_cells=2), full2d=True)
    else:
        mesh = build_mesh(_dam_domain(dx))
    state = initial_state(mesh, InitialCondition(depth, depth))
    while state.t < DAM_TIME:
        dt = min(cfl_dt(mesh, state, include_subcells=False), DAM_TIME - state.t)
        state, _ = advance(mesh, state, dt, mode, lateral=False)

    if mode == 'full2d':
        m2 = mesh.mesh2d
        return l1_depth_error(m2.x, state.U[:, 0], DAM_TIME, DAM_X, DAM_LEFT, DAM_RIGHT)
    ch = mesh.channel
    return l1_depth_error(ch.x_centers, state.A / ch.width, DAM_TIME, DAM_X,
                          DAM_LEFT, DAM_RIGHT, dx=ch.dx)


def _check_stoker(mode):
    coarse = dam_break_error(2.0 * DAM_DX, mode)
    fine = dam_break_error(DAM_DX, mode)
    order = float(np.log2(coarse / fine)) if fine > 0 else float('inf')
    passed = fine <= DAM_L1_LIMIT and fine < coarse and order >= DAM_MIN_ORDER
    return passed, f"L1(Δx={2 * DAM_DX:g}) {coarse:.4f}, L1(Δx={DAM_DX:g}) {fine:.4f}, 阶 {order:.2f}"


def check_stoker_1d(scale=1.0):
    return _check_stoker('hcm')


def check_stoker_2d(scale=1.0):
    return _check_stoker('full2d')


def check_fbm_hcm_nesting(scale=0.25, steps=200):
    """关闭侧向流量的 HCM 与 FBM 逐步逐场一致"""
    fbm = Simulation(build_case(CaseSpec(1, mode='fbm', scale=scale, probes=[])))
    hcm = Simulation(build_case(CaseSpec(1, mode='hcm', scale=scale, probes=[], lateral=False)))
    worst = 0.0
    for _ in range(steps):
        dt = cfl_dt(fbm.mesh, fbm.state, fbm.config.cfl)
        fbm.step(dt)
        hcm.step(dt)
        a, b = fbm.state, hcm.state
        worst = max(worst, float(np.max(np.abs(a.U - b.U))), float(np.max(np.abs(a.A - b.A))),
                    float(np.max(np.abs(a.Q - b.Q))))
    return worst <= 1e-14, f"{steps} 步内最大差 {worst:.2e}"


CHECKS = (
    ('hll_consistency', check_hll_consistency),
    ('rotation_roundtrip', check_rotation_roundtrip),
    ('well_balance_2d', check_well_balance_2d),
    ('well_balance_1d', check_well_balance_1d),
    ('coupled_well_balance', check_coupled_well_balance),
    ('no_numerical_flooding', check_no_numerical_flooding),
    ('mass_conservation', check_mass_conservation),
    ('stoker_1d', check_stoker_1d),
    ('stoker_2d', check_stoker_2d),
    ('fbm_hcm_nesting', check_fbm_hcm_nesting),
)

# 以算例网格运行的检查，接受 scale 参数
SCALED = {'coupled_well_balance', 'no_numerical_flooding', 'mass_conservation', 'fbm_hcm_nesting'}


def run_verification(scale=0.25, names=None):
    """
    运行全部（或指定的）检查

    参数:
        scale: 算例网格缩放系数
        names: 可选的检查名列表

    返回:
        CheckResult 列表
    """
    results = []
    for name, check in CHECKS:
        if names is not None and name not in names:
            continue
        start = time.perf_counter()
        try:
            passed, detail = check(scale) if name in SCALED else check()
        except FloodCoupleError as e:
            passed, detail = False, f"异常: {e}"
        seconds = time.perf_counter() - start
        results.append(CheckResult(name, bool(passed), detail, seconds))
        log = logger.info if passed else logger.error
        log(f"{name}: {'通过' if passed else '失败'} ({detail}, {seconds:.2f} s)")
    return results


def format_table(results):
    """检查结果的文本表格"""
    width = max([len(r.name) for r in results] + [len('check')])
    lines = [f"{'check':<{width}}  result  seconds  detail",
             f"{'-' * width}  ------  -------  ------"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.seconds:7.2f}  {r.detail}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} 项通过")
    return '\n'.join(lines)
