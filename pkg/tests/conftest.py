#!/usr/bin/env python3
"""
pytest 配置
----------
注册 slow 标记：完整时长或桌面尺度网格上的验收测试。
"""


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 完整时长或 scale 0.5 的验收测试（pytest -m \"not slow\" 跳过）")
