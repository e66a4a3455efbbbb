#!/usr/bin/env python3
"""
算例与配置模块
-----------
三个内置算例（平坦漫滩溃坝、高位漫滩、初始干漫滩漫溢）的几何、
初始条件、边界条件、糙率、网格与测点，以及 YAML 运行文件的读写。

运行文件示例:

    case: 3
    run:
      mode: hcm
      end_time: 100
    mesh:
      scale: 0.5
    initial:
      channel_depth: 0.15
    boundary:
      channel_west: {kind: wall}
    output:
      dir: results/case3
      snapshot_times: [40, 100]

网格缩放只改变分辨率（单元数向上取整），不改变物理几何。
"""

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from floodcouple.config.settings import DEFAULT_CFL, DEFAULT_MAX_STEPS, DEFAULT_PROBE_INTERVAL
from floodcouple.core.mesh import BOUNDARY_KINDS, BoundarySpec, ChannelSpec, DomainSpec, FloodplainSpec
from floodcouple.core.simulation import MODES, InitialCondition, Probe, SimConfig
from floodcouple.utils.errors import BoundaryError, ConfigError
from floodcouple.utils.logger import get_logger

logger = get_logger(__name__)

CASE_IDS = (1, 2, 3)

# 三个算例共用的糙率（s·m^(-1/3)）
MANNING_N = 0.009

# 算例 3 的入流过程 (eta0, r, a)
CASE3_HYDROGRAPH = (0.08, 0.025, 10.0)
CASE3_Y_CHANNEL = 3.0

# 可在运行文件中覆盖的边界名称
BOUNDARY_NAMES = ('channel_west', 'channel_east',
                  'floodplain_south', 'floodplain_north', 'floodplain_west', 'floodplain_east')

CONFIG_KEYS = {
    'run': ('mode', 'end_time', 'cfl', 'probe_interval', 'max_steps', 'lateral'),
    'mesh': ('scale',),
    'initial': ('lake_level', 'channel_depth'),
    'boundary': BOUNDARY_NAMES,
    'probes': None,
    'output': ('dir', 'snapshot_times'),
}


@dataclass
class CaseSpec:
    """
    算例选择与覆盖项

    scale 只缩放网格分辨率；lake_level 给出全域静水位；channel_depth 覆盖河道初始水深。
    """
    case_id: int
    mode: str = 'hcm'
    scale: float = 1.0
    output_dir: Optional[str] = None
    end_time: Optional[float] = None
    cfl: float = DEFAULT_CFL
    probe_interval: float = DEFAULT_PROBE_INTERVAL
    max_steps: int = DEFAULT_MAX_STEPS
    lateral: bool = True
    lake_level: Optional[float] = None
    channel_depth: Optional[float] = None
    boundary: dict = field(default_factory=dict)
    probes: Optional[list] = None
    snapshot_times: Optional[tuple] = None

    def __post_init__(self):
        if self.case_id not in CASE_IDS:
            raise ConfigError(f"未知的算例编号: {self.case_id}", key='case')
        if self.mode not in MODES:
            raise ConfigError(f"未知的运行模式: {self.mode}", key='run.mode')
        if not 0 < self.scale <= 1:
            raise ConfigError(f"网格缩放系数必须在 (0, 1] 内: {self.scale}", key='mesh.scale')
        unknown = set(self.boundary) - set(BOUNDARY_NAMES)
        if unknown:
            raise ConfigError(f"未知的边界名称: {sorted(unknown)}", key='boundary')


class StepDepth:
    """x ≤ x_split 取 left，否则取 right"""

    def __init__(self, x_split, left, right):
        self.x_split, self.left, self.right = x_split, left, right

    def __call__(self, x, *rest):
        return np.where(np.asarray(x) <= self.x_split, self.left, self.right)


class UniformDepth:
    def __init__(self, value):
        self.value = value

    def __call__(self, x, *rest):
        return np.full(np.shape(x), float(self.value))


class LakeLevel:
    """静水位 η：水深 max(0, η - z_b)"""

    def __init__(self, level):
        self.level = level

    def __call__(self, *coords):
        return np.maximum(0.0, self.level - np.asarray(coords[-1], dtype=float))


def case3_wall(x):
    """算例 3 的河道墙顶高程 z_b^w(x)"""
    x = np.asarray(x, dtype=float)
    return np.where(x <= 10.5,
                    -0.06 * np.tanh(3.0 * (x - 9.0)) + 0.14,
                    0.06 * np.tanh(3.0 * (x - 15.5)) + 0.14)


def case3_floodplain_bed(x, y):
    """漫滩河床 0.2 + (z_b^w - 0.2)·y / y_c，在河道边上与墙顶相接"""
    return 0.2 + (case3_wall(x) - 0.2) * np.asarray(y, dtype=float) / CASE3_Y_CHANNEL


def scaled(cells, scale):
    """缩放后的单元数（向上取整，至少 1）"""
    return max(1, math.ceil(cells * scale - 1e-9))


def default_end_time(case_id):
    return {1: 10.0, 2: 10.0, 3: 100.0}[case_id]


def default_probes(case_id):
    """
    内置测点

    算例 3 的 P1-P15 为公开坐标；算例 1、2 的测点只出现在示意图中，这里取固定位置
    （算例 1: 河道 3 个 + 漫滩 3 个；算例 2: 河道 3 个 + 漫滩 6 个）。
    """
    if case_id == 1:
        points = [(3.0, 2.05), (8.0, 2.05), (12.6, 1.9), (11.0, 1.2), (13.0, 0.9), (15.0, 0.4)]
    elif case_id == 2:
        points = [(4.0, 2.05), (9.5, 2.05), (13.0, 1.9),
                  (11.0, 1.5), (13.0, 1.5), (15.0, 1.5), (11.0, 0.5), (13.0, 0.5), (15.0, 0.5)]
    else:
        points = [(2.5, 3.5), (4.0, 3.8), (7.0, 3.3), (10.0, 3.4), (11.0, 3.5), (12.0, 3.3),
                  (14.0, 3.4), (16.0, 3.5), (17.3, 3.5), (19.0, 3.5), (12.0, 2.8), (13.0, 2.8),
                  (12.0, 2.5), (12.0, 2.0), (13.0, 1.0)]
    return [Probe(f"P{k}", x, y) for k, (x, y) in enumerate(points, start=1)]


def default_boundaries(case_id):
    """算例 1、2 在河道右端和漫滩下游边开口，算例 3 左端给定水深过程，其余为固壁"""
    if case_id in (1, 2):
        return {'channel_east': BoundarySpec('open'), 'floodplain_east': BoundarySpec('open')}
    return {'channel_west': BoundarySpec('depth', hydrograph=CASE3_HYDROGRAPH),
            'channel_east': BoundarySpec('wall')}


def _domain(case_id, scale, boundaries):
    channel_bc = {side: boundaries[f'channel_{side}']
                  for side in ('west', 'east') if f'channel_{side}' in boundaries}
    floodplain_bc = {side: boundaries[f'floodplain_{side}']
                     for side in ('south', 'north', 'west', 'east') if f'floodplain_{side}' in boundaries}

    if case_id in (1, 2):
        channel = ChannelSpec(0.0, 19.3, 1.8, 2.3, cells=scaled(193, scale),
                              lateral_cells=scaled(25, scale), bed=0.0, manning_n=MANNING_N,
                              boundary=channel_bc)
        if case_id == 1:
            floodplain = FloodplainSpec('floodplain', 9.2, 16.0, 0.0, 1.8, scaled(68, scale),
                                        scaled(90, scale), 0.0, MANNING_N, floodplain_bc)
        else:
            floodplain = FloodplainSpec('floodplain', 10.5, 16.0, 0.0, 1.8, scaled(55, scale),
                                        scaled(90, scale), 0.5, MANNING_N, floodplain_bc)
        return DomainSpec(channel, [floodplain])

    channel = ChannelSpec(0.0, 20.0, CASE3_Y_CHANNEL, 4.0, cells=scaled(600, scale),
                          lateral_cells=scaled(30, scale), bed=0.0, manning_n=MANNING_N,
                          bank_south=case3_wall, boundary=channel_bc)
    floodplain = FloodplainSpec('floodplain', 0.0, 20.0, 0.0, CASE3_Y_CHANNEL, scaled(600, scale),
                                scaled(90, scale), case3_floodplain_bed, MANNING_N, floodplain_bc)
    return DomainSpec(channel, [floodplain])


def _initial(spec):
    if spec.lake_level is not None:
        level = LakeLevel(spec.lake_level)
        return InitialCondition(channel_depth=level, floodplain_depth=level)

    if spec.case_id == 1:
        channel, floodplain = StepDepth(6.10, 0.504, 0.003), UniformDepth(0.003)
    elif spec.case_id == 2:
        channel, floodplain = StepDepth(8.5, 1.5, 0.7), UniformDepth(0.2)
    else:
        channel, floodplain = UniformDepth(CASE3_HYDROGRAPH[0]), UniformDepth(0.0)
    if spec.channel_depth is not None:
        channel = UniformDepth(spec.channel_depth)
    return InitialCondition(channel_depth=channel, floodplain_depth=floodplain)


def build_case(spec):
    """
    由算例描述生成 SimConfig

    参数:
        spec: CaseSpec

    返回:
        SimConfig
    """
    boundaries = default_boundaries(spec.case_id)
    boundaries.update(spec.boundary)
    end_time = default_end_time(spec.case_id) if spec.end_time is None else spec.end_time
    if spec.snapshot_times is not None:
        snapshots = tuple(spec.snapshot_times)
    else:
        snapshots = (40.0, end_time) if spec.case_id == 3 and end_time >= 40.0 else (end_time,)

    config = SimConfig(
        mode=spec.mode,
        end_time=end_time,
        domain=_domain(spec.case_id, spec.scale, boundaries),
        initial=_initial(spec),
        cfl=spec.cfl,
        probes=list(spec.probes) if spec.probes is not None else default_probes(spec.case_id),
        probe_interval=spec.probe_interval,
        snapshot_times=snapshots,
        max_steps=spec.max_steps,
        lateral=spec.lateral,
        name=f"case{spec.case_id}",
    )
    logger.info(f"算例 {spec.case_id}: 模式 {spec.mode}, 缩放 {spec.scale}, 结束时间 {end_time} s")
    return config


# ---------------------------------------------------------------------------
# 运行文件读写


def _boundary_to_dict(bc):
    data = {'kind': bc.kind}
    if bc.value is not None:
        data['value'] = bc.value
    if bc.hydrograph is not None:
        data['hydrograph'] = list(bc.hydrograph)
    return data


def _boundary_from_dict(name, data, line):
    if not isinstance(data, dict):
        raise ConfigError(f"边界 {name} 必须是映射", key=f'boundary.{name}', line=line)
    unknown = set(data) - {'kind', 'value', 'hydrograph'}
    if unknown:
        raise ConfigError(f"边界 {name} 存在未知键: {sorted(unknown)}",
                          key=f'boundary.{name}', line=line)
    if 'kind' not in data:
        raise ConfigError(f"边界 {name} 缺少必需键 kind", key=f'boundary.{name}.kind', line=line)
    if data['kind'] not in BOUNDARY_KINDS:
        raise ConfigError(f"未知的边界类型: {data['kind']}", key=f'boundary.{name}.kind', line=line)
    hydrograph = data.get('hydrograph')
    try:
        return BoundarySpec(data['kind'], data.get('value'),
                            tuple(float(v) for v in hydrograph) if hydrograph is not None else None)
    except BoundaryError as e:
        raise ConfigError(str(e), key=f'boundary.{name}', line=line) from e


def _key_lines(node, prefix=''):
    """YAML 节点树 -> {点分键名: 1 起始行号}"""
    lines = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = f"{prefix}{key_node.value}"
            lines[key] = key_node.start_mark.line + 1
            lines.update(_key_lines(value_node, key + '.'))
    elif isinstance(node, yaml.SequenceNode):
        for k, item in enumerate(node.value):
            key = f"{prefix}{k}"
            lines[key] = item.start_mark.line + 1
            lines.update(_key_lines(item, key + '.'))
    return lines


def _load(text):
    try:
        loader = yaml.SafeLoader(text)
        try:
            node = loader.get_single_node()
            data = loader.construct_document(node) if node is not None else None
        finally:
            loader.dispose()
    except yaml.MarkedYAMLError as e:
        line = e.problem_mark.line + 1 if e.problem_mark is not None else None
        raise ConfigError(f"YAML 语法错误: {e.problem}", line=line) from e
    except yaml.YAMLError as e:
        raise ConfigError(f"YAML 语法错误: {e}") from e
    return data, (_key_lines(node) if node is not None else {})


def _number(value, key, line, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} 必须是数值: {value!r}", key=key, line=line)
    return kind(value)


def case_from_dict(data, lines=None):
    """
    把运行文件内容转换为 CaseSpec

    未知键、缺少 case、类型错误都抛出 ConfigError（带行号）
    """
    lines = lines or {}
    if not isinstance(data, dict):
        raise ConfigError("运行文件顶层必须是映射", line=1)
    for key in data:
        if key != 'case' and key not in CONFIG_KEYS:
            raise ConfigError(f"未知的配置节: {key}", key=key, line=lines.get(key))
    if 'case' not in data:
        raise ConfigError("缺少必需键 case", key='case', line=1)

    kwargs = {'case_id': _number(data['case'], 'case', lines.get('case'), int)}
    for section, allowed in CONFIG_KEYS.items():
        body = data.get(section)
        if body is None or allowed is None:
            continue
        if not isinstance(body, dict):
            raise ConfigError(f"配置节 {section} 必须是映射", key=section, line=lines.get(section))
        for key in body:
            if key not in allowed:
                raise ConfigError(f"未知的配置键: {section}.{key}", key=f'{section}.{key}',
                                  line=lines.get(f'{section}.{key}'))

    run = data.get('run') or {}
    if 'mode' in run:
        kwargs['mode'] = str(run['mode']).lower()
    for key, kind in (('end_time', float), ('cfl', float), ('probe_interval', float),
                      ('max_steps', int)):
        if key in run:
            kwargs[key] = _number(run[key], f'run.{key}', lines.get(f'run.{key}'), kind)
    if 'lateral' in run:
        kwargs['lateral'] = bool(run['lateral'])

    mesh = data.get('mesh') or {}
    if 'scale' in mesh:
        kwargs['scale'] = _number(mesh['scale'], 'mesh.scale', lines.get('mesh.scale'))

    initial = data.get('initial') or {}
    for key in ('lake_level', 'channel_depth'):
        if key in initial:
            kwargs[key] = _number(initial[key], f'initial.{key}', lines.get(f'initial.{key}'))

    boundary = data.get('boundary') or {}
    kwargs['boundary'] = {name: _boundary_from_dict(name, value, lines.get(f'boundary.{name}'))
                          for name, value in boundary.items()}

    if data.get('probes') is not None:
        probes = []
        if not isinstance(data['probes'], list):
            raise ConfigError("probes 必须是列表", key='probes', line=lines.get('probes'))
        for k, item in enumerate(data['probes']):
            line = lines.get(f'probes.{k}')
            if not isinstance(item, dict) or set(item) != {'name', 'x', 'y'}:
                raise ConfigError("测点需要且只能包含 name、x、y", key=f'probes.{k}', line=line)
            probes.append(Probe(str(item['name']), _number(item['x'], 'x', line),
                                _number(item['y'], 'y', line)))
        kwargs['probes'] = probes

    output = data.get('output') or {}
    if 'dir' in output:
        kwargs['output_dir'] = str(output['dir'])
    if 'snapshot_times' in output:
        line = lines.get('output.snapshot_times')
        kwargs['snapshot_times'] = tuple(_number(t, 'output.snapshot_times', line)
                                         for t in output['snapshot_times'])

    try:
        return CaseSpec(**kwargs)
    except ConfigError as e:
        line = lines.get(e.key) if e.key else None
        if line is None or e.line is not None:
            raise
        raise ConfigError(str(e), key=e.key, line=line) from e


def read_case_file(path):
    """读取 YAML 运行文件，返回 CaseSpec"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"运行文件不存在: {path}")
    try:
        data, lines = _load(path.read_text(encoding='utf-8'))
        return case_from_dict(data, lines)
    except ConfigError as e:
        logger.error(f"解析运行文件 {path} 失败: {e}")
        raise


def parse_config(path):
    """读取运行文件并生成 SimConfig"""
    return build_case(read_case_file(path))


def case_to_dict(spec):
    """CaseSpec -> 可写入 YAML 的字典（只包含与默认值不同的项）"""
    defaults = asdict(CaseSpec(spec.case_id))
    current = asdict(spec)
    data = {'case': spec.case_id}

    run = {key: current[key] for key in ('mode', 'end_time', 'cfl', 'probe_interval',
                                         'max_steps', 'lateral')
           if current[key] != defaults[key]}
    if run:
        data['run'] = run
    if spec.scale != 1.0:
        data['mesh'] = {'scale': spec.scale}
    initial = {key: current[key] for key in ('lake_level', 'channel_depth') if current[key] is not None}
    if initial:
        data['initial'] = initial
    if spec.boundary:
        data['boundary'] = {name: _boundary_to_dict(bc) for name, bc in spec.boundary.items()}
    if spec.probes is not None:
        data['probes'] = [{'name': p.name, 'x': p.x, 'y': p.y} for p in spec.probes]
    output = {}
    if spec.output_dir is not None:
        output['dir'] = spec.output_dir
    if spec.snapshot_times is not None:
        output['snapshot_times'] = list(spec.snapshot_times)
    if output:
        data['output'] = output
    return data


def dump_config(spec, path):
    """
    把 CaseSpec 写成 YAML 运行文件，read_case_file 可以原样读回

    返回:
        写入的文件路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(case_to_dict(spec), f, allow_unicode=True, sort_keys=False)
    logger.info(f"运行文件已保存到: {path}")
    return path
