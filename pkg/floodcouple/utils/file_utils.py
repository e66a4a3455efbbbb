#!/usr/bin/env python3
"""
文件处理工具模块
-------------
测点时间序列与场快照的 CSV 读写。
浮点数按 17 位有效数字输出，相同输入得到逐字节相同的文件。
"""

import os
from pathlib import Path

import numpy as np
import pandas as pd

from floodcouple.config.settings import DRY_DEPTH, FLOAT_FORMAT
from floodcouple.core.lateral import lateral_velocity
from floodcouple.core.simulation import ProbeRecord, ProbeSample
from floodcouple.utils.logger import get_logger

logger = get_logger(__name__)

PROBE_COLUMNS = ['t', 'probe_id', 'eta', 'H', 'u', 'v']
SNAPSHOT_COLUMNS = ['x', 'y', 'zb', 'H', 'eta', 'u', 'v', 'vN', 'vS']


def ensure_dir_exists(directory):
    """
    确保目录存在，如果不存在则创建

    参数:
        directory: 目录路径
    """
    try:
        os.makedirs(directory, exist_ok=True)
        return True
    except Exception as e:
        logger.error(f"创建目录时出错: {str(e)}")
        return False


def _write_csv(df, path):
    path = Path(path)
    if path.parent and not ensure_dir_exists(path.parent):
        raise OSError(f"无法创建目录: {path.parent}")
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    logger.info(f"已写入 {len(df)} 行到: {path}")
    return path


def write_probes(records, path):
    """
    写出测点时间序列

    参数:
        records: ProbeRecord 列表
        path: 输出 CSV 路径

    返回:
        文件路径；没有测点时只写表头
    """
    rows = [(rec.time, s.probe_id, s.eta, s.H, s.u, s.v)
            for rec in records for s in rec.samples]
    df = pd.DataFrame(rows, columns=PROBE_COLUMNS)
    df['probe_id'] = df['probe_id'].astype(str)
    return _write_csv(df, path)


def read_probes(path):
    """
    读回 write_probes 写出的文件

    返回:
        ProbeRecord 列表（按文件中的时间顺序）
    """
    df = pd.read_csv(path, float_precision='round_trip', dtype={'probe_id': str})
    missing = set(PROBE_COLUMNS) - set(df.columns)
    if missing:
        raise ValueError(f"测点文件缺少列: {sorted(missing)}")
    records = []
    for t, group in df.groupby('t', sort=False):
        samples = [ProbeSample(row.probe_id, float(row.eta), float(row.H), float(row.u), float(row.v))
                   for row in group.itertuples(index=False)]
        records.append(ProbeRecord(float(t), samples))
    return records


def snapshot_frame(mesh, state):
    """
    场快照表：先二维单元，再一维河道单元

    二维行 vN、vS 为空；河道行 H、u 为断面平均水深和流速，v 为空，
    vN、vS 为南北两侧的侧向速度。
    """
    m2 = mesh.mesh2d
    H = state.U[:, 0]
    wet = H > DRY_DEPTH
    Hs = np.where(wet, H, 1.0)
    frame = pd.DataFrame({
        'x': m2.x,
        'y': m2.y,
        'zb': m2.bed,
        'H': H,
        'eta': m2.bed + H,
        'u': np.where(wet, state.U[:, 1] / Hs, 0.0),
        'v': np.where(wet, state.U[:, 2] / Hs, 0.0),
        'vN': np.nan,
        'vS': np.nan,
    }, columns=SNAPSHOT_COLUMNS)

    if mesh.coupled and state.A.size:
        ch = mesh.channel
        B = ch.width
        h = state.A / B
        wet = state.A > DRY_DEPTH * B
        channel = pd.DataFrame({
            'x': ch.x_centers,
            'y': np.full(ch.n_cells, ch.y_center),
            'zb': ch.sections.bed_elevation,
            'H': h,
            'eta': ch.sections.bed_elevation + h,
            'u': np.where(wet, state.Q / np.where(wet, state.A, 1.0), 0.0),
            'v': np.nan,
            'vN': lateral_velocity(state.A, state.qN, B),
            'vS': lateral_velocity(state.A, state.qS, B),
        }, columns=SNAPSHOT_COLUMNS)
        frame = pd.concat([frame, channel], ignore_index=True)
    return frame


def write_snapshot(mesh, state, path):
    """
    写出 t 时刻的场快照

    参数:
        mesh: CoupledMesh
        state: SimState
        path: 输出 CSV 路径

    返回:
        文件路径
    """
    return _write_csv(snapshot_frame(mesh, state), path)


def snapshot_name(t):
    """快照文件名，例如 snapshot_40.csv、snapshot_2.5.csv"""
    return f"snapshot_{float(t):g}.csv"
