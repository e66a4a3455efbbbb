#!/usr/bin/env python3
"""
测试文件 - 算例与运行文件
---------------------
内置算例的几何与测点、网格缩放、YAML 运行文件的读写与错误报告
"""

import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from floodcouple.core.cases import (
    CASE3_HYDROGRAPH,
    MANNING_N,
    CaseSpec,
    build_case,
    case3_floodplain_bed,
    case3_wall,
    case_to_dict,
    default_probes,
    dump_config,
    parse_config,
    read_case_file,
    scaled,
)
from floodcouple.core.mesh import BoundarySpec, build_mesh
from floodcouple.core.simulation import Probe
from floodcouple.utils.errors import ConfigError


def test_scaled_rounds_up():
    assert scaled(193, 0.5) == 97
    assert scaled(25, 0.5) == 13
    assert scaled(68, 0.5) == 34
    assert scaled(90, 0.5) == 45
    assert scaled(600, 1.0) == 600
    assert scaled(3, 0.01) == 1


def test_case1_full_resolution_domain():
    config = build_case(CaseSpec(1))
    ch = config.domain.channel
    assert ch.cells == 193 and ch.lateral_cells == 25
    assert (ch.x0, ch.x1, ch.y_south, ch.y_north) == (0.0, 19.3, 1.8, 2.3)
    fp = config.domain.floodplains[0]
    assert (fp.nx, fp.ny) == (68, 90)
    assert ch.manning_n == MANNING_N
    assert config.end_time == 10.0
    assert len(config.probes) == 6


def test_case_scale_half():
    config = build_case(CaseSpec(1, scale=0.5))
    assert config.domain.channel.cells == 97
    fp = config.domain.floodplains[0]
    assert (fp.nx, fp.ny) == (34, 45)


def test_case2_elevated_floodplain():
    mesh = build_mesh(build_case(CaseSpec(2, scale=0.2)).domain)
    assert np.allclose(mesh.mesh2d.bed, 0.5)
    assert np.isinf(mesh.channel.sections.bank_right).all()


def test_case3_geometry_and_defaults():
    assert case3_wall(9.0) == pytest.approx(0.14)
    assert case3_wall(0.0) == pytest.approx(0.2, abs=1e-6)
    assert case3_wall(20.0) == pytest.approx(0.2, abs=1e-5)
    assert case3_floodplain_bed(5.0, 0.0) == pytest.approx(0.2)
    assert case3_floodplain_bed(12.0, 3.0) == pytest.approx(case3_wall(12.0))
    config = build_case(CaseSpec(3, scale=0.1))
    assert config.end_time == 100.0
    assert config.snapshot_times == (40.0, 100.0)
    probes = default_probes(3)
    assert [p.name for p in probes][:2] == ['P1', 'P2']
    assert (probes[14].x, probes[14].y) == (13.0, 1.0)
    west = config.domain.channel.boundary['west']
    assert west.hydrograph == CASE3_HYDROGRAPH


def test_case_spec_validation():
    with pytest.raises(ConfigError) as info:
        CaseSpec(4)
    assert info.value.key == 'case'
    with pytest.raises(ConfigError):
        CaseSpec(1, mode='2d')
    with pytest.raises(ConfigError):
        CaseSpec(1, scale=0.0)
    with pytest.raises(ConfigError):
        CaseSpec(1, boundary={'river_west': BoundarySpec('wall')})


def test_lake_level_overrides_initial_state():
    config = build_case(CaseSpec(2, scale=0.2, lake_level=1.6))
    assert config.initial.channel_depth(np.array([1.0]), np.array([0.0]))[0] == pytest.approx(1.6)
    assert config.initial.floodplain_depth(np.array([1.0]), np.array([1.0]),
                                           np.array([0.5]))[0] == pytest.approx(1.1)


def test_run_file_round_trip(tmp_path):
    spec = CaseSpec(3, mode='fbm', scale=0.25, end_time=20.0, channel_depth=0.15,
                    boundary={'channel_west': BoundarySpec('wall'),
                              'channel_east': BoundarySpec('depth', value=0.1)},
                    probes=[Probe('A', 1.0, 3.5)], snapshot_times=(10.0, 20.0),
                    output_dir=str(tmp_path / 'out'))
    path = dump_config(spec, tmp_path / 'run.yaml')
    assert read_case_file(path) == spec
    assert case_to_dict(CaseSpec(1)) == {'case': 1}


def test_parse_config_builds_sim_config(tmp_path):
    path = tmp_path / 'case1.yaml'
    path.write_text("case: 1\nrun:\n  mode: full2d\n  end_time: 2.5\nmesh:\n  scale: 0.5\n",
                    encoding='utf-8')
    config = parse_config(path)
    assert config.mode == 'full2d'
    assert config.end_time == 2.5
    assert config.snapshot_times == (2.5,)


def test_unknown_key_reports_line(tmp_path):
    path = tmp_path / 'bad.yaml'
    path.write_text("case: 1\nrun:\n  mode: hcm\n  cfll: 0.4\n", encoding='utf-8')
    with pytest.raises(ConfigError) as info:
        read_case_file(path)
    assert info.value.line == 4
    assert info.value.key == 'run.cfll'
    assert str(info.value).startswith('第 4 行')


def test_missing_case_and_bad_values(tmp_path):
    path = tmp_path / 'nocase.yaml'
    path.write_text("run:\n  mode: hcm\n", encoding='utf-8')
    with pytest.raises(ConfigError) as info:
        read_case_file(path)
    assert info.value.key == 'case'

    path.write_text("case: 1\nrun:\n  end_time: soon\n", encoding='utf-8')
    with pytest.raises(ConfigError) as info:
        read_case_file(path)
    assert info.value.line == 3

    path.write_text("case: 1\nmesh:\n  scale: 2\n", encoding='utf-8')
    with pytest.raises(ConfigError) as info:
        read_case_file(path)
    assert info.value.line == 3

    path.write_text("case: 1\nboundary:\n  channel_east: {kind: inflow}\n", encoding='utf-8')
    with pytest.raises(ConfigError):
        read_case_file(path)


def test_yaml_syntax_error_and_missing_file(tmp_path):
    path = tmp_path / 'broken.yaml'
    path.write_text("case: 1\nrun: [unclosed\n", encoding='utf-8')
    with pytest.raises(ConfigError) as info:
        read_case_file(path)
    assert info.value.line is not None
    with pytest.raises(ConfigError):
        read_case_file(tmp_path / 'missing.yaml')
