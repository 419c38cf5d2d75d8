"""
catcoh 核心模块

包含：
- fincat / homalg / natsys: 有限范畴、精确同调代数与自然系统
- bw: Baues-Wirsching 上链复形
- grothendieck / spectral / theorems: ∫L、双复形、谱序列与定理检查
- workbench_facade: 任务分派、并发与归档门面（依赖 peewee，由 main.py 直接导入）
"""
