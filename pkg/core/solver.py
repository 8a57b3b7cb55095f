# core/solver.py
"""
困难分布求解器

求 max_μ inf_R cost(R,μ)/score(R,μ)⁺：
- 固定 μ 时，每个形状的最优标注就是叶子上的后验，得分有闭式 Σ (√a − √b)²，
  所以最优回应只需遍历形状（best_response）
- 固定一组带标注的树时，对 μ 的可行性是线性的，用二分 λ + LP 求受限博弈的值
两者交替（double oracle），直到最优回应的比值不低于受限博弈的值减去 tol

求得的 μ 再用于验证两个下界：cost/h² ≥ λ* 与 min{cost(μ₀),cost(μ₁)}/h² ≥ R(f)/3000
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog

from core import distances, oracle, scoring, trees
from core.errors import ConstantFunctionError, ConvergenceError, PreconditionError
from core.foundation import InputDistribution, safe_ratio

logger = logging.getLogger(__name__)

RATIO_BOUND_DENOMINATOR = 240
SHALTIEL_DENOMINATOR = 3000
# 浮点误差以内的得分当作 0（score⁺ 截断）
SCORE_EPS = 1e-12
FEASIBILITY_SLACK = 1e-9


@dataclass
class ShapeTable:
    """每个形状上每个输入到达的叶子序号与查询次数"""
    function: object
    shapes: list
    leaf_of: np.ndarray
    queries: np.ndarray
    leaf_counts: np.ndarray


def shape_table(f):
    trees.check_enumerable(f.n, f.alphabet_size)
    shapes = list(trees.enumerate_shapes(f.n, f.alphabet_size))
    leaf_of = np.zeros((len(shapes), len(f.domain)), dtype=np.int64)
    queries = np.zeros((len(shapes), len(f.domain)), dtype=np.int64)
    for s, shape in enumerate(shapes):
        for i, x in enumerate(f.domain):
            leaf_of[s, i], queries[s, i], _ = trees.route(shape, x)
    leaf_counts = np.array([trees.num_leaves(shape) for shape in shapes], dtype=np.int64)
    return ShapeTable(f, shapes, leaf_of, queries, leaf_counts)


def _weights(mu):
    if isinstance(mu, InputDistribution):
        return mu.probabilities()
    return np.asarray(mu, dtype=float)


def _leaf_masses(table, s, weights):
    values = table.function.values_array()
    count = int(table.leaf_counts[s])
    a = np.bincount(table.leaf_of[s], weights=weights * (1 - values), minlength=count)
    b = np.bincount(table.leaf_of[s], weights=weights * values, minlength=count)
    return a, b


def _posterior(a, b):
    total = a + b
    with np.errstate(invalid='ignore', divide='ignore'):
        labels = np.where(total > 0, b / np.where(total > 0, total, 1.0), 0.5)
    return labels


def _clamped(score):
    return score if score > SCORE_EPS else 0.0


def opt_score(shape, mu):
    """
    给形状的每片叶子标上后验 b/(a+b) 时的 hs 得分 Σ (√a − √b)²
    返回 (得分, 深度优先顺序的标签)；没有质量的叶子标 1/2
    """
    f = mu.function
    count = trees.num_leaves(shape)
    a = np.zeros(count)
    b = np.zeros(count)
    for x, w in mu.items():
        leaf, _, _ = trees.route(shape, x)
        if f.value(x) == 1:
            b[leaf] += float(w)
        else:
            a[leaf] += float(w)
    score = float(np.sum((np.sqrt(a) - np.sqrt(b)) ** 2))
    return score, tuple(float(q) for q in _posterior(a, b))


class BestResponse(NamedTuple):
    shape_index: int
    shape: object
    labels: tuple
    cost: float
    score: float
    ratio: float

    def labelled(self):
        return trees.label_shape(self.shape, self.labels)


def best_response(f, mu, table=None):
    """所有形状（后验标注）中 cost/score⁺ 最小者，并列时取枚举顺序在前的"""
    if table is None:
        table = shape_table(f)
    weights = _weights(mu)
    best = None
    for s, shape in enumerate(table.shapes):
        a, b = _leaf_masses(table, s, weights)
        score = float(np.sum((np.sqrt(a) - np.sqrt(b)) ** 2))
        cost = float(np.dot(weights, table.queries[s]))
        ratio = safe_ratio(cost, _clamped(score))
        if best is None or ratio < best.ratio:
            best = BestResponse(s, shape, tuple(float(q) for q in _posterior(a, b)), cost, score, ratio)
    return best


@dataclass
class _Strategy:
    shape_index: int
    labels: tuple
    costs: np.ndarray
    scores: np.ndarray


def _strategy(table, response, score_floor):
    """带固定标注的树在每个输入上的 (查询次数, hs 得分)"""
    values = table.function.values_array()
    s = response.shape_index
    leaf_labels = np.asarray(response.labels)[table.leaf_of[s]]
    forecast = np.where(values == 1, leaf_labels, 1 - leaf_labels)
    scores = np.maximum(scoring.eval_rule_array('hs', forecast), score_floor)
    return _Strategy(s, response.labels, table.queries[s].astype(float), scores)


def _restricted_feasible(strategies, balance_row, lam):
    """
    max t  s.t. Σ μ_x (cost_D(x) − λ·score_D(x)) ≥ t  ∀D，μ 在平衡的单纯形上
    返回 (t, μ)
    """
    m = len(balance_row)
    A_ub = np.array([np.append(-(st.costs - lam * st.scores), 1.0) for st in strategies])
    b_ub = np.zeros(len(strategies))
    A_eq = np.array([np.append(np.ones(m), 0.0), np.append(balance_row, 0.0)])
    b_eq = np.array([1.0, 0.5])
    objective = np.zeros(m + 1)
    objective[-1] = -1.0
    bounds = [(0.0, 1.0)] * m + [(None, None)]
    res = linprog(objective, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method='highs')
    if not res.success:
        raise RuntimeError(f"受限博弈 LP 求解失败: {res.message}")
    return float(res.x[-1]), np.clip(res.x[:m], 0.0, None)


def _restricted_game(strategies, balance_row, upper, tol):
    """对 λ ∈ [0, upper] 二分，返回 (λ 的下端点, 该点的 μ)"""
    lo, hi = 0.0, float(upper)
    _, mu = _restricted_feasible(strategies, balance_row, lo)
    t, mu_hi = _restricted_feasible(strategies, balance_row, hi)
    if t >= -FEASIBILITY_SLACK:
        return hi, mu_hi
    while hi - lo > tol / 4:
        mid = (lo + hi) / 2
        t, candidate = _restricted_feasible(strategies, balance_row, mid)
        if t >= -FEASIBILITY_SLACK:
            lo, mu = mid, candidate
        else:
            hi = mid
    return lo, mu


def rationalize(f, weights, max_denominator=10 ** 6, tol=1e-6):
    """
    连分数取整到分母 ≤ max_denominator，再按类别缩放使两类各占 1/2
    输入本身必须已经在 tol 以内平衡，缩放只修正取整误差
    """
    raw = np.asarray(weights, dtype=float)
    drift = abs(float(np.dot(raw, f.values_array())) - 0.5 * float(raw.sum()))
    if drift > tol:
        raise PreconditionError(f"μ(f⁻¹(1)) 偏离 1/2 达 {drift:.3e}，超过 tol = {tol:.1e}")
    approx = [max(Fraction(float(w)).limit_denominator(max_denominator), Fraction(0)) for w in raw]
    rescaled = list(approx)
    for b in (0, 1):
        members = [i for i, v in enumerate(f.values) if v == b]
        mass = sum((approx[i] for i in members), Fraction(0))
        if mass == 0:
            raise PreconditionError(f"μ 在 f⁻¹({b}) 上没有质量，无法平衡")
        for i in members:
            rescaled[i] = approx[i] / (2 * mass)
    logger.debug("有理化: 原始偏差 %.3e, 最大分母 %d", drift, max(w.denominator for w in rescaled))
    return InputDistribution(f, tuple(rescaled))


@dataclass
class HardDistributionCertificate:
    """
    lambda_star 是受限博弈的值（上估计），lower_value 是有理化后 μ 上的
    最优回应比值（下估计），tolerance ≥ 两者之差
    """
    function: object
    mu: InputDistribution
    lambda_star: float
    lower_value: float
    tolerance: float
    tol: float
    support_trees: list
    iterations: int
    converged: bool
    imbalance: float
    history: list = field(default_factory=list)
    # 最后一轮 LP 给出的浮点 μ，有理化之前
    raw_mu: tuple = ()


def derive_score_floor(upper, max_cost, tol):
    """
    −∞ 得分的有限替代值，随 λ 的上界与最大查询次数缩放：
    质量 ≥ tol 的输入在约束行里贡献至少 λ·(max_cost + λ_hi)
    """
    return -(max_cost + upper) / tol


def solve_hard(f, tol=1e-6, max_iter=200, score_floor=None, max_denominator=10 ** 6):
    """
    double oracle：受限博弈 → 在 μ 上求最优回应 → 加入策略集，
    直到最优回应比值 ≥ 受限博弈值 − tol

    score_floor 缺省时由 λ 的上界 n 与最大查询次数推出
    """
    if f.is_constant():
        raise ConstantFunctionError("constant function: f 是常函数，R(f) = 0，没有困难分布")
    table = shape_table(f)
    balance_row = f.values_array().astype(float)
    ones = balance_row.sum()
    weights = np.where(balance_row == 1, 0.5 / ones, 0.5 / (len(balance_row) - ones))

    upper = float(f.n)
    if score_floor is None:
        score_floor = derive_score_floor(upper, float(table.queries.max()), tol)
    logger.debug("得分下限 %.3e", score_floor)
    strategies = [_strategy(table, best_response(f, weights, table), score_floor)]
    history = []
    converged = False
    value = upper
    iteration = 0
    for iteration in range(1, max_iter + 1):
        value, weights = _restricted_game(strategies, balance_row, upper, tol)
        response = best_response(f, weights, table)
        history.append({
            'iteration': iteration,
            'restricted_value': value,
            'best_response_ratio': response.ratio,
            'strategies': len(strategies),
        })
        logger.debug("第 %d 轮: 受限博弈 %.9f, 最优回应 %.9f, 策略数 %d",
                     iteration, value, response.ratio, len(strategies))
        if response.ratio >= value - tol:
            converged = True
            break
        strategies.append(_strategy(table, response, score_floor))
        upper = min(upper, value + tol)

    # LP 的等式行保证平衡到求解器的可行性精度以内；rationalize 会核对
    mu = rationalize(f, weights, max_denominator, tol=max(tol, 100 * FEASIBILITY_SLACK))
    imbalance = float(abs(float(np.dot(weights, balance_row)) - 0.5))
    lower = best_response(f, mu, table).ratio
    support = []
    for st in strategies:
        tree = trees.label_shape(table.shapes[st.shape_index], st.labels)
        algorithm = trees.RandomizedForecastTree.deterministic(tree)
        c = float(trees.cost(algorithm, mu))
        s = trees.score(algorithm, mu, 'hs')
        ratio = safe_ratio(c, _clamped(s))
        if ratio <= value + max(tol, value - lower):
            support.append({'tree': tree, 'cost': c, 'score': s, 'ratio': ratio})
    cert = HardDistributionCertificate(
        function=f,
        mu=mu,
        lambda_star=value,
        lower_value=lower,
        tolerance=max(tol, value - lower),
        tol=tol,
        support_trees=support,
        iterations=iteration,
        converged=converged,
        imbalance=imbalance,
        history=history,
        raw_mu=tuple(float(w) for w in weights),
    )
    if not converged:
        raise ConvergenceError(f"{max_iter} 轮内未收敛，受限博弈值 {value}，最优回应 {lower}", cert)
    logger.info("求解完成: λ* = %.9f（下估计 %.9f），%d 轮", value, lower, iteration)
    return cert


def _grid_points(f, resolution):
    """分母为 1/resolution 的有理网格上所有平衡的 μ"""
    steps = int(round(1 / Fraction(resolution)))
    if steps % 2:
        raise PreconditionError("网格分母必须为偶数，才能精确平衡")
    if f.is_constant():
        raise ConstantFunctionError("constant function: f 是常函数")
    half = steps // 2
    zeros = f.inputs_with_value(0)
    ones = f.inputs_with_value(1)

    def points():
        for part0 in _compositions(half, len(zeros)):
            for part1 in _compositions(half, len(ones)):
                counts = dict(zip(zeros, part0))
                counts.update(zip(ones, part1))
                yield InputDistribution(f, tuple(Fraction(counts[x], steps) for x in f.domain))

    return points()


def grid_oracle(f, resolution=Fraction(1, 100), table=None):
    """
    在分母为 1/resolution 的有理网格上枚举所有平衡的 μ，
    返回 (最大的最优回应比值, 对应的 μ)
    """
    points = _grid_points(f, resolution)
    if table is None:
        table = shape_table(f)
    best_ratio, best_mu = -math.inf, None
    for mu in points:
        ratio = best_response(f, mu, table).ratio
        if ratio > best_ratio:
            best_ratio, best_mu = ratio, mu
    return best_ratio, best_mu


def grid_maximizers(f, resolution=Fraction(1, 100), slack=1e-9, table=None):
    """网格上最优回应比值不低于最大值减 slack 的所有 μ（最大值点通常不唯一）"""
    points = _grid_points(f, resolution)
    if table is None:
        table = shape_table(f)
    scored = [(best_response(f, mu, table).ratio, mu) for mu in points]
    best = max(ratio for ratio, _ in scored)
    return [mu for ratio, mu in scored if ratio >= best - slack]


def _compositions(total, parts):
    for cut in itertools.combinations(range(total + parts - 1), parts - 1):
        bounds = (-1,) + cut + (total + parts - 1,)
        yield tuple(bounds[i + 1] - bounds[i] - 1 for i in range(parts))


@dataclass(frozen=True)
class SplitHardPair:
    mu0: InputDistribution
    mu1: InputDistribution


def split(cert):
    """把平衡的 μ 拆成 f⁻¹(0) 与 f⁻¹(1) 上的条件分布"""
    mu = cert.mu
    imbalance = mu.mass_of(1) - Fraction(1, 2)
    if abs(imbalance) > 10 * cert.tol:
        raise PreconditionError(f"μ 严重不平衡（{float(imbalance)}），求解器可能失败")
    if imbalance != 0:
        mu = rationalize(mu.function, [float(w) for w in mu.weights], tol=10 * cert.tol)
    return SplitHardPair(mu.conditional(0), mu.conditional(1))


@dataclass
class VerificationReport:
    name: str
    randomized_complexity: int
    bound: float
    min_ratio: float
    rows: list

    @property
    def passed(self):
        return all(row['status'] == 'pass' for row in self.rows) and self.min_ratio >= self.bound - 1e-9


def _transcript_h2(shape, pair):
    algorithm = trees.RandomizedForecastTree.deterministic(shape)
    return distances.distance(trees.transcript_pair(algorithm, pair.mu0, pair.mu1), 'h2')


def verify_ratio_bound(f, cert, randomized_complexity=None):
    """
    对每个形状（后验标注）检查 cost(D,μ)/h²(tran(D,μ₀),tran(D,μ₁)) ≥ λ* − tolerance；
    h² 经由记录分布计算，并与闭式得分核对到 10⁻⁹
    """
    if randomized_complexity is None:
        randomized_complexity = oracle.randomized_worst(f, oracle.DEFAULT_EPS).value
    pair = split(cert)
    mu = cert.mu
    rows = []
    min_ratio = math.inf
    for s, shape in enumerate(trees.enumerate_shapes(f.n, f.alphabet_size)):
        closed, _ = opt_score(shape, mu)
        h2 = _transcript_h2(shape, pair)
        c = float(sum((w * trees.route(shape, x)[1] for x, w in mu.items()), Fraction(0)))
        ratio = safe_ratio(c, _clamped(h2))
        min_ratio = min(min_ratio, ratio)
        ok = ratio >= cert.lambda_star - cert.tolerance - FEASIBILITY_SLACK and abs(closed - h2) <= 1e-9
        rows.append({'shape': s, 'cost': c, 'h2': h2, 'opt_score': closed, 'ratio': ratio,
                     'status': 'pass' if ok else 'fail'})
    bound = randomized_complexity / RATIO_BOUND_DENOMINATOR
    return VerificationReport('ratio-bound', randomized_complexity, bound, min_ratio, rows)


def verify_shaltiel_free(f, pair, randomized_complexity=None):
    """对每个形状检查 min{cost(D,μ₀), cost(D,μ₁)} ≥ h²·R(f)/3000"""
    if randomized_complexity is None:
        randomized_complexity = oracle.randomized_worst(f, oracle.DEFAULT_EPS).value
    factor = randomized_complexity / SHALTIEL_DENOMINATOR
    rows = []
    min_ratio = math.inf
    for s, shape in enumerate(trees.enumerate_shapes(f.n, f.alphabet_size)):
        h2 = _transcript_h2(shape, pair)
        costs = [float(sum((w * trees.route(shape, x)[1] for x, w in mu.items()), Fraction(0)))
                 for mu in (pair.mu0, pair.mu1)]
        cheaper = min(costs)
        ratio = safe_ratio(cheaper, _clamped(h2))
        min_ratio = min(min_ratio, ratio)
        ok = cheaper >= h2 * factor - 1e-9
        rows.append({'shape': s, 'cost0': costs[0], 'cost1': costs[1], 'h2': h2, 'ratio': ratio,
                     'status': 'pass' if ok else 'fail'})
    return VerificationReport('shaltiel', randomized_complexity, factor, min_ratio, rows)
