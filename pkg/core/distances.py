# core/distances.py
"""
距离度量模块

全变差 (tv)、Hellinger (h2)、对称 χ² (chi2s)、Jensen-Shannon (js) 的加权版本，
以及“最优预测得分 = 距离”的对应关系：
    bias ↔ tv，hs ↔ h2，brier ↔ chi2s，ls ↔ js

记 ν = (1−w)ν₀ + wν₁，R(x) = |(1−w)ν₀[x] − wν₁[x]| / ν[x]，
四个距离分别是 E_ν[R]、E_ν[1−√(1−R²)]、E_ν[R²]、E_ν[1−H((1+R)/2)]。
w = 1/2 时与通常的无权定义一致。
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import entr

from core import scoring
from core.foundation import expectation

MEASURES = ('tv', 'h2', 'chi2s', 'js')

# 评分规则 → 对应的距离
RULE_TO_MEASURE = {'bias': 'tv', 'hs': 'h2', 'brier': 'chi2s', 'ls': 'js'}


@dataclass(frozen=True)
class FinitePair:
    """有限支撑上的两个分布 ν₀、ν₁ 以及先验权重 w"""
    support: tuple
    nu0: np.ndarray
    nu1: np.ndarray
    w: float = 0.5

    def __post_init__(self):
        nu0 = np.asarray(self.nu0, dtype=float)
        nu1 = np.asarray(self.nu1, dtype=float)
        if nu0.shape != (len(self.support),) or nu1.shape != (len(self.support),):
            raise ValueError("nu0 / nu1 的长度必须等于支撑大小")
        if len(set(self.support)) != len(self.support):
            raise ValueError("支撑点不能重复")
        if (nu0 < 0).any() or (nu1 < 0).any():
            raise ValueError("概率不能为负")
        if abs(nu0.sum() - 1) > 1e-12 or abs(nu1.sum() - 1) > 1e-12:
            raise ValueError("nu0 与 nu1 都必须是概率分布")
        if not 0 <= self.w <= 1:
            raise ValueError(f"权重 w 必须在 [0,1] 内: {self.w}")
        object.__setattr__(self, 'support', tuple(self.support))
        object.__setattr__(self, 'nu0', nu0)
        object.__setattr__(self, 'nu1', nu1)

    def masses(self):
        """返回 ((1−w)ν₀, wν₁, ν)"""
        a = (1 - self.w) * self.nu0
        b = self.w * self.nu1
        return a, b, a + b


def _imbalance(pair):
    """只保留 ν[x] > 0 的点，返回 (ν, R)"""
    a, b, nu = pair.masses()
    mask = nu > 0
    return nu[mask], np.abs(a[mask] - b[mask]) / nu[mask]


def _binary_entropy(alpha):
    return (entr(alpha) + entr(1 - alpha)) / math.log(2)


def distance(pair, measure):
    """加权距离；ν[x] = 0 的点贡献 0"""
    if measure not in MEASURES:
        raise KeyError(f"未知的距离 {measure}，可选: " + ", ".join(MEASURES))
    nu, r = _imbalance(pair)
    if measure == 'tv':
        values = r
    elif measure == 'h2':
        # 1 − √(1−R²) 写成 R²/(1+√(1−R²))，避免相减抵消
        values = r ** 2 / (1 + np.sqrt(np.clip(1 - r ** 2, 0.0, None)))
    elif measure == 'chi2s':
        values = r ** 2
    else:
        values = 1 - _binary_entropy((1 + r) / 2)
    return float(np.dot(nu, values))


def optimal_forecast(pair, rule):
    """
    每个支撑点的最优预测
    恰当规则取后验 wν₁[x]/ν[x]；bias 规则取 1/0，平局取 1/2
    ν[x] = 0 的点不出现在结果中
    """
    scoring._check_rule(rule)
    a, b, nu = pair.masses()
    forecast = {}
    for label, ai, bi, ni in zip(pair.support, a, b, nu):
        if ni <= 0:
            continue
        if rule == 'bias':
            forecast[label] = 1.0 if bi > ai else 0.0 if bi < ai else 0.5
        else:
            forecast[label] = float(bi / ni)
    return forecast


def forecast_score(pair, rule, forecast):
    """
    给定预测 φ 的期望得分 Σ (1−w)ν₀[x]·s₀(φ(x)) + wν₁[x]·s₁(φ(x))
    """
    a, b, _ = pair.masses()
    terms = []
    for label, ai, bi in zip(pair.support, a, b):
        if ai + bi <= 0:
            continue
        q = forecast[label]
        terms.append((ai, scoring.eval_outcome(rule, q, 0)))
        terms.append((bi, scoring.eval_outcome(rule, q, 1)))
    return expectation(terms)


def max_score(pair, rule):
    """最优预测的期望得分，等于对应的距离"""
    return forecast_score(pair, rule, optimal_forecast(pair, rule))


def binary_chain(x):
    """
    标量不等式链上的五个量：
        x²/2 ≤ 1−√(1−x²) ≤ 1−H((1+x)/2) ≤ x² ≤ x，x ∈ [0,1]
    """
    if not 0 <= x <= 1:
        raise ValueError(f"x 必须在 [0,1] 内: {x}")
    hellinger = x * x / (1 + math.sqrt(max(1 - x * x, 0.0)))
    js = 1 - float(_binary_entropy(np.float64((1 + x) / 2)))
    return (x * x / 2, hellinger, js, x * x, x)


def assemble_mixture(mixtures):
    """
    显式构造不相交混合：ν_b = Σ 权重ᵢ · ν_bⁱ，支撑为各支撑的并
    mixtures: [(权重, FinitePair), ...]，权重之和为 1
    """
    _check_disjoint(mixtures)
    support, nu0, nu1 = [], [], []
    for weight, pair in mixtures:
        support.extend(pair.support)
        nu0.extend(weight * pair.nu0)
        nu1.extend(weight * pair.nu1)
    return FinitePair(tuple(support), np.array(nu0), np.array(nu1), 0.5)


def _check_disjoint(mixtures):
    seen = set()
    for _, pair in mixtures:
        if pair.w != 0.5:
            raise ValueError("不相交混合要求每个分量的 w = 1/2")
        overlap = seen.intersection(pair.support)
        if overlap:
            raise ValueError(f"分量的支撑有重叠: {sorted(map(str, overlap))[:3]}")
        seen.update(pair.support)
    total = sum(weight for weight, _ in mixtures)
    if abs(total - 1) > 1e-12:
        raise ValueError("混合权重之和必须为 1")


def h2_disjoint_mixture(mixtures):
    """不相交混合的 Hellinger 距离 = 各分量 h² 的加权平均"""
    _check_disjoint(mixtures)
    return sum(weight * distance(pair, 'h2') for weight, pair in mixtures)
