"""
核心数值模块
"""
