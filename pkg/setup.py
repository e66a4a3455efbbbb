#!/usr/bin/env python3
"""
setup.py - FloodCouple
-------------------
为 FloodCouple 包创建安装脚本
"""

from setuptools import setup, find_packages

setup(
    name="floodcouple",
    version="1.0.0",
    description="一维河道 Saint-Venant 求解器与二维漫滩浅水求解器的耦合洪水模拟工具包",
    author="CC",
    packages=find_packages(exclude=("tests",)),
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "pandas>=1.5",
        "pyyaml>=6.0",
        "python-dotenv>=1.0.0",
    ],
    entry_points={
        'console_scripts': [
            'floodcouple=floodcouple.main:main',
        ],
    },
    python_requires=">=3.8",
)
