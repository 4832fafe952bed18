"""DADA 领域自适应桌面工具包"""

__version__ = "0.1.0"
