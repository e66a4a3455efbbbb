#!/usr/bin/env python3
"""
测试文件 - 结果文件读写
--------------------
测点 CSV 的表头与往返、场快照的行布局
"""

import os
import sys

import numpy as np
import pandas as pd
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from floodcouple.core.cases import LakeLevel
from floodcouple.core.mesh import ChannelSpec, DomainSpec, FloodplainSpec, build_mesh
from floodcouple.core.simulation import InitialCondition, ProbeRecord, ProbeSample, initial_state
from floodcouple.utils.file_utils import (
    PROBE_COLUMNS,
    SNAPSHOT_COLUMNS,
    read_probes,
    snapshot_frame,
    snapshot_name,
    write_probes,
    write_snapshot,
)


def test_empty_probe_file_has_header_only(tmp_path):
    path = write_probes([ProbeRecord(0.0, [])], tmp_path / 'probes.csv')
    assert path.read_text(encoding='utf-8') == ','.join(PROBE_COLUMNS) + '\n'


def test_probe_file_layout(tmp_path):
    records = [ProbeRecord(0.0, [ProbeSample('P1', 0.5, 0.5, 0.0, 0.0)]),
               ProbeRecord(0.1, [ProbeSample('P1', 0.25, 0.25, 0.1, 0.0)])]
    path = write_probes(records, tmp_path / 'probes.csv')
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0] == 't,probe_id,eta,H,u,v'
    assert len(lines) == 3
    assert lines[1].startswith('0,P1,0.5,')


def test_probe_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(5)
    records = [ProbeRecord(float(t), [ProbeSample(f'P{k}', *map(float, rng.normal(size=4)))
                                      for k in (1, 2)])
               for t in (0.0, 0.1 + 1e-17, 1.0 / 3.0)]
    path = write_probes(records, tmp_path / 'probes.csv')
    assert read_probes(path) == records
    # 相同输入写出相同的字节
    again = write_probes(records, tmp_path / 'again.csv')
    assert again.read_bytes() == path.read_bytes()


def test_read_probes_rejects_missing_columns(tmp_path):
    path = tmp_path / 'bad.csv'
    path.write_text('t,eta\n0,1\n', encoding='utf-8')
    with pytest.raises(ValueError):
        read_probes(path)


def coupled_lake(level=0.8):
    domain = DomainSpec(ChannelSpec(0.0, 1.0, 1.0, 1.5, cells=1),
                        [FloodplainSpec('fp', 0.0, 1.0, 0.0, 1.0, 1, 1, bed=0.5)])
    mesh = build_mesh(domain)
    return mesh, initial_state(mesh, InitialCondition(LakeLevel(level), LakeLevel(level)))


def test_snapshot_single_cell_layout(tmp_path):
    mesh, state = coupled_lake()
    frame = snapshot_frame(mesh, state)
    assert list(frame.columns) == SNAPSHOT_COLUMNS
    assert len(frame) == 2
    fp, ch = frame.iloc[0], frame.iloc[1]
    assert (fp.x, fp.y, fp.zb) == (0.5, 0.5, 0.5)
    assert np.isnan(fp.vN) and np.isnan(fp.vS)
    assert ch.y == pytest.approx(1.25)
    assert np.isnan(ch.v)
    assert ch.vN == 0.0 and ch.vS == 0.0

    path = write_snapshot(mesh, state, tmp_path / snapshot_name(40))
    assert path.name == 'snapshot_40.csv'
    back = pd.read_csv(path, float_precision='round_trip')
    assert np.allclose(back['eta'], 0.8)


def test_snapshot_name():
    assert snapshot_name(2.5) == 'snapshot_2.5.csv'
    assert snapshot_name(100.0) == 'snapshot_100.csv'
