# core/__init__.py
# 核心模块初始化文件
