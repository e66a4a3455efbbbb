#!/usr/bin/env python3
"""
河道-漫滩耦合洪水模拟主程序
----------------------
运行内置算例（full2d / hcm / fbm 三种模式）并输出测点时间序列与场快照，
或运行验证检查集。

示例:
    floodcouple run --case 3 --mode hcm --scale 0.5
    floodcouple run --config runs/case1.yaml --out results/case1
    floodcouple verify --scale 0.25
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from floodcouple import __version__
from floodcouple.config.settings import LOG_FILE, RESULTS_DIR
from floodcouple.core.cases import CaseSpec, build_case, dump_config, read_case_file
from floodcouple.core.simulation import MODES, Simulation
from floodcouple.core.verification import format_table, run_verification
from floodcouple.utils.errors import FloodCoupleError
from floodcouple.utils.file_utils import snapshot_name, write_probes, write_snapshot
from floodcouple.utils.logger import get_logger, run_log, setup_logger

logger = get_logger(__name__)


def resolve_case(args):
    """
    合并运行文件与命令行参数，命令行优先

    返回:
        CaseSpec
    """
    if args.config:
        spec = read_case_file(args.config)
        overrides = {}
        if args.case is not None:
            overrides['case_id'] = args.case
        if args.mode is not None:
            overrides['mode'] = args.mode
        if args.scale is not None:
            overrides['scale'] = args.scale
        if args.end_time is not None:
            overrides['end_time'] = args.end_time
        if args.out is not None:
            overrides['output_dir'] = args.out
        return replace(spec, **overrides) if overrides else spec

    if args.case is None:
        raise FloodCoupleError("必须指定 --case 或 --config")
    return CaseSpec(
        case_id=args.case,
        mode=args.mode or 'hcm',
        scale=1.0 if args.scale is None else args.scale,
        end_time=args.end_time,
        output_dir=args.out,
    )


def run_case(spec):
    """
    运行一个算例并写出结果文件

    参数:
        spec: CaseSpec

    返回:
        (RunResult, 输出目录)
    """
    out_dir = Path(spec.output_dir) if spec.output_dir else RESULTS_DIR / f"case{spec.case_id}_{spec.mode}"
    with run_log(out_dir):
        config = build_case(spec)
        sim = Simulation(config)
        result = sim.run()

        write_probes(result.records, out_dir / 'probes.csv')
        for t, state in sorted(result.snapshots.items()):
            write_snapshot(sim.mesh, state, out_dir / snapshot_name(t))
        dump_config(replace(spec, output_dir=str(out_dir)), out_dir / 'run.yaml')

        logger.info(f"算例 {spec.case_id} ({spec.mode}) 完成: {result.steps} 步, "
                    f"耗时 {result.wall_time:.2f} s, 结果目录 {out_dir}")
    return result, out_dir


def main():
    """主函数"""
    parser = argparse.ArgumentParser(description='一维河道/二维漫滩耦合洪水模拟')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command')

    run_parser = subparsers.add_parser('run', help='运行内置算例')
    run_parser.add_argument('--case', type=int, choices=(1, 2, 3), help='算例编号')
    run_parser.add_argument('--mode', type=str, choices=MODES, help='运行模式（默认 hcm）')
    run_parser.add_argument('--scale', type=float, help='网格缩放系数 (0, 1]，默认 1')
    run_parser.add_argument('--end-time', type=float, help='结束时间（s），默认取算例设置')
    run_parser.add_argument('--out', type=str, help='结果输出目录')
    run_parser.add_argument('--config', type=str, help='YAML 运行文件')
    run_parser.add_argument('--log-level', type=str, default=None,
                            choices=('debug', 'info', 'warning', 'error'), help='日志级别')

    verify_parser = subparsers.add_parser('verify', help='运行验证检查集')
    verify_parser.add_argument('--scale', type=float, default=0.25, help='算例网格缩放系数')
    verify_parser.add_argument('--log-level', type=str, default=None,
                               choices=('debug', 'info', 'warning', 'error'), help='日志级别')

    args = parser.parse_args()
    if args.command is None:
        parser.print_help()
        return 1

    if args.log_level:
        setup_logger('floodcouple', level=args.log_level, log_file=LOG_FILE)

    try:
        if args.command == 'verify':
            results = run_verification(scale=args.scale)
            print(format_table(results))
            return 0 if all(r.passed for r in results) else 1

        run_case(resolve_case(args))
        return 0

    except FloodCoupleError as e:
        logger.error(f"运行失败: {str(e)}")
        return 1
    except OSError as e:
        logger.error(f"写出结果失败: {str(e)}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
