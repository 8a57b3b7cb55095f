# core/scoring.py
"""
评分规则模块
hs、Brier、bias、ls 四种规则，s₀/s₁ 约定，以及用网格搜索检查“恰当性”
约定：分数越高越好，s(1) = 1，s(1/2) = 0
"""

import math
from typing import NamedTuple

import numpy as np

RULES = ('hs', 'brier', 'bias', 'ls')


def _check_rule(rule):
    if rule not in RULES:
        raise KeyError(f"未知的评分规则 {rule}，可选: " + ", ".join(RULES))


def eval_rule(rule, q):
    """
    计算 s(q)，q ∈ [0,1]
    hs(0) 与 ls(0) 返回 -∞；对数以 2 为底，使 ls(1/2) = 0
    """
    _check_rule(rule)
    if not 0 <= q <= 1:
        raise ValueError(f"预测值必须在 [0,1] 内: {q}")
    if rule == 'hs':
        if q == 0:
            return -math.inf
        return 1 - math.sqrt((1 - q) / q)
    if rule == 'brier':
        return float(1 - 4 * (1 - q) ** 2)
    if rule == 'bias':
        return float(1 - 2 * (1 - q))
    if q == 0:
        return -math.inf
    return 1 + math.log2(q)


def eval_outcome(rule, q, outcome):
    """s₁(q) = s(q)，s₀(q) = s(1 − q)"""
    if outcome == 1:
        return eval_rule(rule, q)
    if outcome == 0:
        return eval_rule(rule, 1 - q)
    raise ValueError(f"结果只能是 0 或 1: {outcome}")


def eval_rule_array(rule, qs):
    """eval_rule 的向量化版本，用于网格计算"""
    _check_rule(rule)
    qs = np.asarray(qs, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        if rule == 'hs':
            out = 1 - np.sqrt((1 - qs) / qs)
        elif rule == 'brier':
            out = 1 - 4 * (1 - qs) ** 2
        elif rule == 'bias':
            out = 1 - 2 * (1 - qs)
        else:
            out = 1 + np.log2(qs)
    if rule in ('hs', 'ls'):
        out = np.where(qs == 0, -np.inf, out)
    return out


class ProperCheck(NamedTuple):
    passed: bool
    argmax: float
    maximizers: tuple


def check_proper(rule, p, grid_steps=10000):
    """
    在 q 网格上最大化 p·s(q) + (1−p)·s(1−q)

    对 hs / brier / ls：argmax 与 p 相差不超过一个网格步长即通过
    对 bias：期望分数关于 q 是线性的，最大值集合只能是 {0}、{1} 或整个区间，
    满足这一点即通过（说明 bias 不是恰当规则）
    """
    if grid_steps < 100:
        raise ValueError("grid_steps 至少为 100")
    qs = np.linspace(0.0, 1.0, grid_steps + 1)
    up = eval_rule_array(rule, qs)
    down = eval_rule_array(rule, 1 - qs)
    # 0·(-∞) 只出现在 p ∈ {0,1}，按 0 处理
    with np.errstate(invalid='ignore'):
        objective = np.where(up == -np.inf, -np.inf if p > 0 else 0.0, p * up) \
            + np.where(down == -np.inf, -np.inf if p < 1 else 0.0, (1 - p) * down)
    best = objective.max()
    argmax = float(qs[int(np.argmax(objective))])
    hits = qs[np.isclose(objective, best, rtol=0, atol=1e-12)]
    if rule == 'bias':
        if len(hits) == len(qs):
            maximizers = (0.0, 1.0)
        else:
            maximizers = tuple(float(q) for q in hits)
        passed = maximizers in ((0.0,), (1.0,), (0.0, 1.0))
        return ProperCheck(passed, argmax, maximizers)
    passed = abs(argmax - p) <= 1.0 / grid_steps + 1e-15
    return ProperCheck(passed, argmax, (argmax,))
