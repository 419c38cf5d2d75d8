"""
catcoh 命令处理器模块

包含：
- ComputeCommandHandler: validate / cohomology / grothendieck / spectral
- CheckCommandHandler: 引理、命题与定理检查
"""

from .compute_commands import ComputeCommandHandler
from .check_commands import CheckCommandHandler

__all__ = ['ComputeCommandHandler', 'CheckCommandHandler']
