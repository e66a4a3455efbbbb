"""
FloodCouple
-----------
一维河道与二维漫滩耦合的浅水方程有限体积模拟工具包
"""

__version__ = '1.0.0'
