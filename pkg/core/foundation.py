# core/foundation.py
"""
基础类型模块
部分布尔函数、输入分布，以及扩展实数（±∞）的运算约定
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from core.errors import PreconditionError


# 扩展实数直接用 float 表示，math.inf / -math.inf 即 ±∞
ExtendedReal = float


def safe_ratio(num, den):
    """
    比值约定：r/0 = +∞（r ∈ (0, ∞]），0/0 = +∞
    调用方负责先对分母做 (·)⁺ 截断
    """
    if den <= 0:
        return math.inf
    return num / den


def expectation(terms):
    """
    计算 Σ p·v，概率为 0 的项直接跳过（0·∞ := 0）
    terms: [(概率, 值), ...]；只要有正概率的 -∞ 就返回 -∞
    """
    total = 0.0
    for prob, value in terms:
        if prob == 0:
            continue
        if math.isinf(value):
            return value
        total += float(prob) * value
    return total


@dataclass(frozen=True)
class PartialFunction:
    """
    部分布尔函数 f: S → {0,1}，S ⊆ Σⁿ

    domain 按字典序排好并且互不相同，这样分布向量在不同运行之间下标稳定
    """
    n: int
    alphabet_size: int
    domain: tuple
    values: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n 必须为正整数: {self.n}")
        if not 2 <= self.alphabet_size <= 10:
            raise ValueError(f"字母表大小必须在 2..10 之间: {self.alphabet_size}")
        if len(self.domain) == 0:
            raise ValueError("定义域不能为空")
        if len(self.domain) != len(self.values):
            raise ValueError("domain 与 values 长度不一致")
        for x in self.domain:
            if len(x) != self.n:
                raise ValueError(f"输入 {x!r} 的长度不是 {self.n}")
            if any(not c.isdigit() or int(c) >= self.alphabet_size for c in x):
                raise ValueError(f"输入 {x!r} 含有字母表之外的符号")
        if len(set(self.domain)) != len(self.domain):
            raise ValueError("定义域中有重复的输入")
        if list(self.domain) != sorted(self.domain):
            raise ValueError("定义域必须按字典序排列")
        if any(v not in (0, 1) for v in self.values):
            raise ValueError("函数值只能是 0 或 1")
        object.__setattr__(self, '_index', {x: i for i, x in enumerate(self.domain)})

    @staticmethod
    def create(n, alphabet_size, domain, values):
        """按字典序整理 domain（values 跟着一起排）后构造"""
        if len(domain) != len(values):
            raise ValueError("domain 与 values 长度不一致")
        pairs = sorted(zip(domain, values))
        return PartialFunction(n, alphabet_size, tuple(x for x, _ in pairs), tuple(int(v) for _, v in pairs))

    @staticmethod
    def from_callable(n, fn, alphabet_size=2, domain=None):
        """
        由 Python 函数生成真值表

        参数:
            fn: 接收符号元组 (x1, ..., xn)，返回 0/1
            domain: 可选的输入字符串列表，默认是全部 Σⁿ
        """
        if domain is None:
            domain = [''.join(map(str, t)) for t in itertools.product(range(alphabet_size), repeat=n)]
        values = [int(fn(tuple(int(c) for c in x))) for x in domain]
        return PartialFunction.create(n, alphabet_size, list(domain), values)

    def index(self, x):
        return self._index[x]

    def value(self, x):
        return self.values[self._index[x]]

    def __contains__(self, x):
        return x in self._index

    def __len__(self):
        return len(self.domain)

    def is_constant(self):
        return len(set(self.values)) == 1

    def inputs_with_value(self, b):
        return [x for x, v in zip(self.domain, self.values) if v == b]

    def values_array(self):
        return np.array(self.values, dtype=np.int64)


@dataclass(frozen=True)
class InputDistribution:
    """定义域上的概率分布，权重为精确有理数，总和恰为 1"""
    function: PartialFunction
    weights: tuple

    def __post_init__(self):
        if len(self.weights) != len(self.function.domain):
            raise ValueError("权重个数必须等于定义域大小")
        weights = tuple(Fraction(w) for w in self.weights)
        if any(w < 0 for w in weights):
            raise ValueError("权重不能为负")
        if sum(weights) != 1:
            raise ValueError(f"权重之和必须恰好为 1，实际为 {sum(weights)}")
        object.__setattr__(self, 'weights', weights)

    @staticmethod
    def uniform(function):
        m = len(function.domain)
        return InputDistribution(function, tuple(Fraction(1, m) for _ in range(m)))

    @staticmethod
    def point_mass(function, x):
        weights = [Fraction(0)] * len(function.domain)
        weights[function.index(x)] = Fraction(1)
        return InputDistribution(function, tuple(weights))

    @staticmethod
    def from_weights(function, weights):
        """非负权重按比例归一化（精确运算）"""
        weights = [Fraction(w) for w in weights]
        total = sum(weights)
        if total <= 0:
            raise ValueError("权重之和必须为正")
        return InputDistribution(function, tuple(w / total for w in weights))

    def __getitem__(self, x):
        return self.weights[self.function.index(x)]

    def support(self):
        return [x for x, w in zip(self.function.domain, self.weights) if w > 0]

    def items(self):
        return zip(self.function.domain, self.weights)

    def probabilities(self):
        return np.array([float(w) for w in self.weights])

    def mass_of(self, b):
        """μ(f⁻¹(b))"""
        return sum((w for w, v in zip(self.weights, self.function.values) if v == b), Fraction(0))

    def conditional(self, b):
        """μ 在 f⁻¹(b) 上的条件分布（仍定义在整个定义域上，另一类权重为 0）"""
        mass = self.mass_of(b)
        if mass == 0:
            raise PreconditionError(f"μ 在 f⁻¹({b}) 上没有质量，无法取条件分布")
        weights = [w / mass if v == b else Fraction(0) for w, v in zip(self.weights, self.function.values)]
        return InputDistribution(self.function, tuple(weights))


def is_balanced(mu):
    """
    返回 (是否平衡, μ(f⁻¹(1)) − 1/2)，不平衡度为精确有理数
    """
    imbalance = mu.mass_of(1) - Fraction(1, 2)
    return imbalance == 0, imbalance
