#!/usr/bin/env python3
"""
全局配置
-------
物理常数、数值参数、路径与日志设置。
环境变量（或项目根目录下的 .env 文件）可覆盖路径和日志级别。
"""

import os
from pathlib import Path

from dotenv import load_dotenv

ROOT_DIR = Path(__file__).resolve().parent.parent.parent

load_dotenv(ROOT_DIR / '.env')

# 物理常数
GRAVITY = 9.81

# 数值参数
DRY_DEPTH = 1e-8
DEFAULT_CFL = 0.45
FALLBACK_DT = 1e-3
NEGATIVE_DEPTH_TOLERANCE = 1e-12
DEFAULT_MAX_STEPS = 2_000_000
DEFAULT_PROBE_INTERVAL = 0.1

# 输出格式：17 位有效数字保证浮点数往返无损
FLOAT_FORMAT = '%.17g'

# 路径
RESULTS_DIR = Path(os.environ.get('FLOODCOUPLE_RESULTS_DIR', ROOT_DIR / 'results'))
LOG_DIR = Path(os.environ.get('FLOODCOUPLE_LOG_DIR', ROOT_DIR / 'logs'))

# 日志
LOG_LEVEL = os.environ.get('FLOODCOUPLE_LOG_LEVEL', 'info')
# 可选的滚动日志文件，相对路径放在 LOG_DIR 下
LOG_FILE = os.environ.get('FLOODCOUPLE_LOG_FILE') or None
# 每次运行写在结果目录下的日志
RUN_LOG_NAME = 'run.log'
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'
