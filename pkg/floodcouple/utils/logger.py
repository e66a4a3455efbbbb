#!/usr/bin/env python3
"""
日志工具模块
-----------
floodcouple 日志记录器的配置：控制台输出、可选的滚动日志文件
（FLOODCOUPLE_LOG_FILE），以及每次算例运行写在结果目录下的 run.log。
"""

import logging
import sys
from contextlib import contextmanager
from logging.handlers import RotatingFileHandler
from pathlib import Path

from floodcouple.config.settings import (
    LOG_DATE_FORMAT,
    LOG_DIR,
    LOG_FILE,
    LOG_FORMAT,
    LOG_LEVEL,
    RUN_LOG_NAME,
)

ROOT_LOGGER = 'floodcouple'

LOG_LEVELS = {
    'debug': logging.DEBUG,
    'info': logging.INFO,
    'warning': logging.WARNING,
    'error': logging.ERROR,
    'critical': logging.CRITICAL
}


def _formatter():
    return logging.Formatter(LOG_FORMAT, datefmt=LOG_DATE_FORMAT)


def setup_logger(name=ROOT_LOGGER, level='info', log_file=None, console=True):
    """
    设置日志记录器

    参数:
        name: 日志记录器名称
        level: 日志级别 ('debug', 'info', 'warning', 'error', 'critical')
        log_file: 滚动日志文件，相对路径放在 LOG_DIR 下；为 None 则不写文件
        console: 是否输出到标准输出

    返回:
        配置好的日志记录器
    """
    logger = logging.getLogger(name)
    logger.setLevel(LOG_LEVELS.get(level.lower(), logging.INFO))

    # 重复调用时替换旧的处理程序，run_log 挂上的文件保留
    for handler in list(logger.handlers):
        if not getattr(handler, 'run_log', False):
            logger.removeHandler(handler)
            handler.close()

    if console:
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setFormatter(_formatter())
        logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        if not log_path.is_absolute():
            LOG_DIR.mkdir(parents=True, exist_ok=True)
            log_path = LOG_DIR / log_path
        file_handler = RotatingFileHandler(
            log_path, maxBytes=10*1024*1024, backupCount=5, encoding='utf-8'
        )
        file_handler.setFormatter(_formatter())
        logger.addHandler(file_handler)

    return logger


@contextmanager
def run_log(out_dir, level=None):
    """
    在一次算例运行期间把 floodcouple 的全部日志另写一份到 out_dir/run.log

    参数:
        out_dir: 结果目录（不存在时创建）
        level: 文件的日志级别，默认与记录器一致

    返回:
        run.log 的路径（with 语句的目标）
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / RUN_LOG_NAME

    handler = logging.FileHandler(path, mode='w', encoding='utf-8')
    handler.setFormatter(_formatter())
    if level:
        handler.setLevel(LOG_LEVELS.get(level.lower(), logging.INFO))
    handler.run_log = True

    logger = logging.getLogger(ROOT_LOGGER)
    logger.addHandler(handler)
    try:
        yield path
    finally:
        logger.removeHandler(handler)
        handler.close()


app_logger = setup_logger(ROOT_LOGGER, level=LOG_LEVEL, log_file=LOG_FILE)


def get_logger(name=None):
    """
    获取指定名称的日志记录器，未指定时返回应用默认记录器

    参数:
        name: 模块名，如 'floodcouple.core.solver2d'
    """
    if name:
        return logging.getLogger(name)
    return app_logger
