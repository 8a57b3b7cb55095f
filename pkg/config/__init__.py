# config/__init__.py
# 配置模块初始化文件
