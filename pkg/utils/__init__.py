# utils/__init__.py
# 工具模块初始化文件
