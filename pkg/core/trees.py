# core/trees.py
"""
预测决策树模块

确定性树：内部节点查询某个下标，每个符号对应一个孩子；叶子给出预测 q ∈ [0,1]
（q 是对 f(x) = 1 的信心）。布尔树是叶子全为 0/1 的特例。
随机树：有限个确定性树上的概率分布。

cost / score / bias 对任何提供 outcomes(x) 的“算法”对象都适用：
outcomes(x) 返回 [(概率, 预测, 查询次数), ...]
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Optional, Union

from core import scoring
from core.distances import FinitePair
from core.errors import EnumerationLimitError
from core.foundation import expectation

logger = logging.getLogger(__name__)

# 二元字母表 n = 3 时布尔树的个数，超过它就不再穷举
MAX_BOOLEAN_TREES = 16430


@dataclass(frozen=True)
class Leaf:
    """叶子；prediction 为 None 表示还没标注的形状"""
    prediction: Optional[object] = None


@dataclass(frozen=True)
class Query:
    """内部节点：查询 x[index]，children[s] 是读到符号 s 后的子树"""
    index: int
    children: tuple


DeterministicForecastTree = Union[Leaf, Query]


class Transcript(NamedTuple):
    tree_index: int
    leaf_path: tuple


def validate_tree(tree, n, alphabet_size, used=frozenset()):
    """检查下标范围、孩子个数、路径上不重复查询、叶子标签范围"""
    if isinstance(tree, Leaf):
        q = tree.prediction
        if q is not None and not 0 <= q <= 1:
            raise ValueError(f"叶子预测必须在 [0,1] 内: {q}")
        return
    if not isinstance(tree, Query):
        raise ValueError(f"无法识别的树节点: {tree!r}")
    if not 0 <= tree.index < n:
        raise ValueError(f"查询下标越界: {tree.index}")
    if tree.index in used:
        raise ValueError(f"同一路径上重复查询下标 {tree.index}")
    if len(tree.children) != alphabet_size:
        raise ValueError(f"查询节点需要 {alphabet_size} 个孩子，实际 {len(tree.children)} 个")
    for child in tree.children:
        validate_tree(child, n, alphabet_size, used | {tree.index})


def depth(tree):
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(c) for c in tree.children)


@lru_cache(maxsize=None)
def num_leaves(tree):
    if isinstance(tree, Leaf):
        return 1
    return sum(num_leaves(c) for c in tree.children)


def leaves(tree):
    """按深度优先顺序列出叶子"""
    if isinstance(tree, Leaf):
        return [tree]
    return [leaf for c in tree.children for leaf in leaves(c)]


def label_shape(shape, labels):
    """按深度优先顺序把 labels 依次写到叶子上"""
    labels = list(labels)
    if len(labels) != num_leaves(shape):
        raise ValueError(f"需要 {num_leaves(shape)} 个标签，实际 {len(labels)} 个")
    it = iter(labels)

    def _build(node):
        if isinstance(node, Leaf):
            return Leaf(next(it))
        return Query(node.index, tuple(_build(c) for c in node.children))

    return _build(shape)


def route(tree, x):
    """返回 (叶子的深度优先序号, 查询次数, 路径)"""
    offset, queries, path = 0, 0, []
    node = tree
    while isinstance(node, Query):
        if node.index >= len(x):
            raise ValueError(f"输入 {x!r} 太短，无法查询下标 {node.index}")
        symbol = int(x[node.index])
        if symbol >= len(node.children):
            raise ValueError(f"符号 {symbol} 超出节点的孩子个数")
        offset += sum(num_leaves(c) for c in node.children[:symbol])
        path.append((node.index, symbol))
        queries += 1
        node = node.children[symbol]
    return offset, queries, tuple(path)


def run(tree, x):
    """在输入 x 上运行确定性树，返回 (预测, 查询次数, 路径)"""
    node = tree
    path = []
    while isinstance(node, Query):
        symbol = int(x[node.index])
        if symbol >= len(node.children):
            raise ValueError(f"符号 {symbol} 超出节点的孩子个数")
        path.append((node.index, symbol))
        node = node.children[symbol]
    if not isinstance(node, Leaf):
        raise ValueError(f"树的结构不合法: {node!r}")
    return node.prediction, len(path), tuple(path)


@dataclass(frozen=True)
class RandomizedForecastTree:
    """确定性预测树上的有限分布，概率为精确有理数"""
    support: tuple

    def __post_init__(self):
        if len(self.support) == 0:
            raise ValueError("随机树的支撑不能为空")
        support = tuple((Fraction(p), tree) for p, tree in self.support)
        if any(p < 0 for p, _ in support):
            raise ValueError("概率不能为负")
        if sum(p for p, _ in support) != 1:
            raise ValueError("随机树的概率之和必须恰好为 1")
        object.__setattr__(self, 'support', support)

    @staticmethod
    def deterministic(tree):
        return RandomizedForecastTree(((Fraction(1), tree),))

    def trees(self):
        return [tree for _, tree in self.support]

    def outcomes(self, x):
        result = []
        for p, tree in self.support:
            prediction, queries, _ = run(tree, x)
            result.append((p, prediction, queries))
        return result

    def relabel(self, fn):
        """对每片叶子的预测应用 fn，树的形状与概率不变"""
        return RandomizedForecastTree(tuple(
            (p, label_shape(tree, [fn(leaf.prediction) for leaf in leaves(tree)]))
            for p, tree in self.support))


def mix(first, second, lam):
    """λ·first + (1−λ)·second"""
    lam = Fraction(lam)
    if not 0 <= lam <= 1:
        raise ValueError(f"混合系数必须在 [0,1] 内: {lam}")
    support = [(lam * p, t) for p, t in first.support] + [((1 - lam) * p, t) for p, t in second.support]
    return RandomizedForecastTree(tuple(support))


# ---------- cost / score / bias ----------

def input_cost(algorithm, x):
    """cost(R, x)：在 x 上的期望查询次数"""
    return sum((p * queries for p, _, queries in algorithm.outcomes(x)), Fraction(0))


def cost(algorithm, mu):
    """cost(R, μ) = E_{x←μ}[cost(R, x)]，精确有理数"""
    return sum((w * input_cost(algorithm, x) for x, w in mu.items() if w > 0), Fraction(0))


def input_score(algorithm, f, x, rule='hs'):
    """score(R, x) = E[s_{f(x)}(pred(R, x))]"""
    b = f.value(x)
    return expectation((p, scoring.eval_outcome(rule, q, b)) for p, q, _ in algorithm.outcomes(x))


def score(algorithm, mu, rule='hs'):
    f = mu.function
    return expectation((w, input_score(algorithm, f, x, rule)) for x, w in mu.items())


def input_bias(algorithm, f, x):
    """
    bias(R, x) = 1 − 2·Pr[输出 ≠ f(x)]，叶子预测 q 视为输出 Bernoulli(q)
    叶子标签都是有理数时结果是精确的
    """
    b = f.value(x)
    total = 0
    for p, q, _ in algorithm.outcomes(x):
        total += p * (2 * q - 1 if b == 1 else 1 - 2 * q)
    return total


def bias(algorithm, mu):
    f = mu.function
    return sum(w * input_bias(algorithm, f, x) for x, w in mu.items() if w > 0)


def worst_case_score(algorithm, f, rule='hs'):
    return min(input_score(algorithm, f, x, rule) for x in f.domain)


def worst_case_bias(algorithm, f):
    return min(input_bias(algorithm, f, x) for x in f.domain)


# ---------- 记录（transcript） ----------

def transcript_distribution(randomized, mu):
    """
    (树的序号, 根到叶的路径) 上的精确分布
    不同序号的记录天然不相交
    """
    dist = {}
    for i, (p, tree) in enumerate(randomized.support):
        if p == 0:
            continue
        for x, w in mu.items():
            if w == 0:
                continue
            _, _, path = run(tree, x)
            key = Transcript(i, path)
            dist[key] = dist.get(key, Fraction(0)) + p * w
    return dist


def transcript_pair(randomized, mu0, mu1):
    """把 tran(R, μ₀) 与 tran(R, μ₁) 放到同一支撑上，得到 w = 1/2 的 FinitePair"""
    d0 = transcript_distribution(randomized, mu0)
    d1 = transcript_distribution(randomized, mu1)
    support = sorted(set(d0) | set(d1))
    return FinitePair(
        tuple(support),
        [float(d0.get(t, 0)) for t in support],
        [float(d1.get(t, 0)) for t in support],
        0.5,
    )


# ---------- 穷举 ----------

def count_shapes(n, alphabet_size=2):
    """S(k) = 1 + k·S(k−1)^|Σ|，S(0) = 1"""
    s = 1
    for k in range(1, n + 1):
        s = 1 + k * s ** alphabet_size
    return s


def count_boolean_trees(n, alphabet_size=2):
    """T(k) = 2 + k·T(k−1)^|Σ|，T(0) = 2"""
    t = 2
    for k in range(1, n + 1):
        t = 2 + k * t ** alphabet_size
    return t


def check_enumerable(n, alphabet_size=2):
    if n < 0:
        raise ValueError(f"n 不能为负: {n}")
    total = count_boolean_trees(n, alphabet_size)
    if total > MAX_BOOLEAN_TREES:
        raise EnumerationLimitError(
            f"n={n}, |Σ|={alphabet_size} 时有 {total} 棵布尔树，超过穷举上限 {MAX_BOOLEAN_TREES}")


def _shapes(available, alphabet_size, memo):
    if available in memo:
        return memo[available]
    result = [Leaf()]
    for i in sorted(available):
        sub = _shapes(available - {i}, alphabet_size, memo)
        for children in itertools.product(sub, repeat=alphabet_size):
            result.append(Query(i, children))
    memo[available] = result
    return result


def enumerate_shapes(n, alphabet_size=2):
    """
    所有不重复查询的树形状（叶子未标注），每个恰好一次
    顺序：先按深度，再按根的查询下标，再按孩子的递归顺序
    """
    check_enumerable(n, alphabet_size)
    shapes = _shapes(frozenset(range(n)), alphabet_size, {})
    ordered = sorted(shapes, key=depth)
    logger.debug("n=%d |Σ|=%d: %d 个形状", n, alphabet_size, len(ordered))
    yield from ordered


def enumerate_boolean_trees(n, alphabet_size=2, max_depth=None):
    """每个形状配上所有 0/1 叶子标注；形状顺序同上，标注按字典序（0 在前）"""
    for shape in enumerate_shapes(n, alphabet_size):
        if max_depth is not None and depth(shape) > max_depth:
            continue
        for labels in itertools.product((Fraction(0), Fraction(1)), repeat=num_leaves(shape)):
            yield label_shape(shape, labels)
