# core/oracle.py
"""
查询复杂度的穷举预言机

- det_complexity：确定性复杂度 D(f)
- randomized_worst：最坏情况有界错误的随机复杂度 R_ε(f)（按最坏深度计）
- distributional：μ 下 bias ≥ γ 的最小期望代价（Pareto 下凸包络）
- distributional_depth：μ 下错误 ≤ ε 的最小最坏深度（经典分布复杂度）
- verify_avg_worst：检查 R̄^μ_γ(f) ≥ γ²·R(f)/500
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from core import lp, trees
from core.errors import PreconditionError

logger = logging.getLogger(__name__)

AVG_WORST_DENOMINATOR = 500
DEFAULT_EPS = Fraction(1, 3)


@dataclass
class ComplexityReport:
    kind: str
    value: object
    witness: Optional[trees.RandomizedForecastTree]
    parameters: dict = field(default_factory=dict)


def _leaf_routes(shape, f):
    """每个输入到达的叶子序号和查询次数"""
    return [trees.route(shape, x)[:2] for x in f.domain]


def _leaf_masses(shape, f, mu):
    """每片叶子上 f = 0 与 f = 1 的 μ 质量 (a, b)"""
    count = trees.num_leaves(shape)
    a = [Fraction(0)] * count
    b = [Fraction(0)] * count
    for (leaf, _), value, w in zip(_leaf_routes(shape, f), f.values, mu.weights):
        if value == 1:
            b[leaf] += w
        else:
            a[leaf] += w
    return a, b


def det_complexity(f):
    """能在 Dom(f) 上精确计算 f 的布尔树的最小深度"""
    trees.check_enumerable(f.n, f.alphabet_size)
    for shape in trees.enumerate_shapes(f.n, f.alphabet_size):
        labels = {}
        consistent = True
        for (leaf, _), value in zip(_leaf_routes(shape, f), f.values):
            if labels.setdefault(leaf, value) != value:
                consistent = False
                break
        if consistent:
            return trees.depth(shape)
    raise AssertionError("全查询的树总能计算 f")


def randomized_worst(f, eps):
    """
    最小的 T，使得深度 ≤ T 的布尔树上存在混合，在每个 x ∈ Dom(f) 上错误 ≤ ε
    每个 T 只保留“正确输入集合”互不包含的树，再解可行性 LP
    """
    eps = Fraction(eps)
    if not 0 <= eps < Fraction(1, 2):
        raise PreconditionError(f"ε 必须在 [0, 1/2) 内: {eps}")
    trees.check_enumerable(f.n, f.alphabet_size)
    m = len(f.domain)
    for T in range(f.n + 1):
        profiles = {}
        for tree in trees.enumerate_boolean_trees(f.n, f.alphabet_size, max_depth=T):
            mask = 0
            for i, x in enumerate(f.domain):
                if trees.run(tree, x)[0] == f.values[i]:
                    mask |= 1 << i
            profiles.setdefault(mask, tree)
        masks = [mk for mk in profiles if not any(other != mk and other & mk == mk for other in profiles)]
        masks.sort()
        constraints = [([1] * len(masks), '=', 1)]
        for i in range(m):
            row = [0 if mk >> i & 1 else 1 for mk in masks]
            constraints.append((row, '<=', eps))
        result = lp.solve(lp.LinearProgram([0] * len(masks), 'min', constraints))
        logger.debug("randomized_worst T=%d: %d 列, %s", T, len(masks), type(result).__name__)
        if isinstance(result, lp.Optimal):
            support = tuple((w, profiles[mk]) for w, mk in zip(result.primal, masks) if w > 0)
            return ComplexityReport('randomized_worst', T, trees.RandomizedForecastTree(support), {'eps': eps})
    raise AssertionError("T = n 时全查询的树总是可行的")


def _best_labelled(shape, f, mu):
    """固定形状时 bias 最大的标注（按叶子上的多数质量），返回 (树, bias, cost)"""
    a, b = _leaf_masses(shape, f, mu)
    labels = [Fraction(1) if bi > ai else Fraction(0) for ai, bi in zip(a, b)]
    tree = trees.label_shape(shape, labels)
    bias = sum((abs(bi - ai) for ai, bi in zip(a, b)), Fraction(0))
    cost = sum((w * q for (_, q), w in zip(_leaf_routes(shape, f), mu.weights)), Fraction(0))
    return tree, bias, cost


def distributional(f, mu, gamma):
    """
    所有布尔树混合中满足 E_μ[bias] ≥ γ 的最小 E_μ[cost]
    同一形状的各种标注代价相同，只有 bias 最大的标注可能落在包络上
    """
    gamma = Fraction(gamma)
    if not 0 < gamma <= 1:
        raise PreconditionError(f"γ 必须在 (0,1] 内: {gamma}")
    if mu.function != f:
        raise PreconditionError("μ 不是定义在 f 上的分布")
    trees.check_enumerable(f.n, f.alphabet_size)
    candidates = [_best_labelled(shape, f, mu) for shape in trees.enumerate_shapes(f.n, f.alphabet_size)]
    envelope = lp.pareto_lower_envelope([(bias, cost) for _, bias, cost in candidates])
    value = envelope(gamma)
    mixture = envelope.witness(gamma)
    witness = None
    if mixture:
        witness = trees.RandomizedForecastTree(tuple((w, candidates[i][0]) for w, i in mixture))
    return ComplexityReport('distributional', value, witness, {'gamma': gamma})


def distributional_depth(f, mu, eps):
    """μ 下错误率 ≤ ε 的单棵布尔树的最小深度"""
    eps = Fraction(eps)
    if not 0 <= eps < Fraction(1, 2):
        raise PreconditionError(f"ε 必须在 [0, 1/2) 内: {eps}")
    trees.check_enumerable(f.n, f.alphabet_size)
    for shape in trees.enumerate_shapes(f.n, f.alphabet_size):
        a, b = _leaf_masses(shape, f, mu)
        error = sum((min(ai, bi) for ai, bi in zip(a, b)), Fraction(0))
        if error <= eps:
            tree, _, _ = _best_labelled(shape, f, mu)
            return ComplexityReport('distributional_depth', trees.depth(shape),
                                    trees.RandomizedForecastTree.deterministic(tree), {'eps': eps})
    raise AssertionError("全查询的树在任何 μ 下错误都是 0")


@dataclass
class AvgWorstReport:
    randomized_complexity: int
    rows: list

    @property
    def passed(self):
        return all(row['status'] == 'pass' for row in self.rows)


def verify_avg_worst(f, mu, gammas, randomized_complexity=None):
    """
    对每个 γ 比较 R̄^μ_γ(f) 与 γ²·R(f)/500，R(f) = randomized_worst(f, 1/3)
    """
    if randomized_complexity is None:
        randomized_complexity = randomized_worst(f, DEFAULT_EPS).value
    rows = []
    for gamma in gammas:
        gamma = Fraction(gamma)
        value = distributional(f, mu, gamma).value
        bound = gamma * gamma * randomized_complexity / AVG_WORST_DENOMINATOR
        rows.append({
            'gamma': gamma,
            'distributional': value,
            'bound': bound,
            'status': 'pass' if value >= bound else 'fail',
        })
    return AvgWorstReport(randomized_complexity, rows)
