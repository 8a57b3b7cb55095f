# config/settings.py
"""
配置文件模块
管理求解与验证的默认参数，如容差、迭代次数、随机种子等
"""

import json
import logging
import os

logger = logging.getLogger(__name__)


class Settings:
    """
    运行设置类
    默认值写在 DEFAULT_SETTINGS 里，可以用 JSON 文件覆盖；命令行参数优先级最高
    """

    DEFAULT_SETTINGS = {
        # 求解器
        'tol': 1e-6,
        'max_iter': 200,
        'max_denominator': 10 ** 6,
        'score_floor': None,  # None 表示按 λ 上界与最大查询次数推出

        # 复杂度预言机
        'eps': '1/3',
        'gammas': ['1/10', '1/5', '3/10', '2/5', '1/2', '3/5', '7/10', '4/5', '9/10', '1'],

        # 蒙特卡洛
        'seed': 0,
        'trials': 100000,
        'threads': 0,  # 0 表示使用全部 CPU

        # 评分规则网格
        'grid_steps': 10000,
    }

    def __init__(self, config_file=None):
        """初始化Settings对象；config_file 为 None 时只用默认值"""
        self.config_file = config_file
        self.settings = self.load_settings()

    def load_settings(self):
        """
        读取 JSON 配置并与默认值合并

        文件不存在或格式错误时抛出 ValueError，由 CLI 转成退出码 2
        """
        settings = dict(self.DEFAULT_SETTINGS)
        if self.config_file is None:
            return settings
        if not os.path.exists(self.config_file):
            raise ValueError(f"找不到配置文件: {self.config_file}")
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ValueError(f"配置文件读取失败: {e}") from e
        if not isinstance(loaded, dict):
            raise ValueError("配置文件必须是 JSON 对象")
        unknown = sorted(set(loaded) - set(self.DEFAULT_SETTINGS))
        if unknown:
            raise ValueError(f"未知的配置项: {', '.join(unknown)}")
        settings.update(loaded)
        logger.debug("成功加载配置文件: %s", self.config_file)
        return settings

    def get(self, key, default=None):
        """
        获取某个设置项

        参数:
            key: 配置项名称
            default: 默认值（如果key不存在）
        """
        return self.settings.get(key, default)

    def override(self, **values):
        """用命令行参数覆盖设置，值为 None 的参数表示未指定"""
        for key, value in values.items():
            if value is not None:
                self.settings[key] = value

    def threads(self):
        """线程数；0 表示可用的 CPU 个数"""
        count = int(self.get('threads', 0))
        return count if count > 0 else (os.cpu_count() or 1)
