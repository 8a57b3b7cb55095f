# core/amplify.py
"""
放大模块

- combine / amplified_tree：hs 得分的线性放大，k 次独立运行后
  score = 1 − (1 − s)^k
- bias_to_forecast / forecast_to_bias：偏差与 hs 得分之间的转换
- amp_bounds：½·min{kx,1} ≤ 1−(1−x)^k ≤ min{kx,1}
- odometer_amplifier：先用查询次数估计自身代价、再决定重复次数的三阶段构造（蒙特卡洛）
- majority_amplify：偏差 γ → 偏差 1/2，重复 ⌈2/γ²⌉ 次
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import expit

from core import trees
from core.errors import PreconditionError
from core.foundation import safe_ratio

logger = logging.getLogger(__name__)

# 里程表构造中的常数
TRUNCATE_FACTOR = 2          # 每次运行超过 2Y 次查询就截断并输出 1/2
PHASE_ONE_FACTOR = 10        # 第一阶段一直运行到总查询数达到 10Y
FINAL_CUTOFF_FACTOR = 240    # 最终在 240Y 次查询处截断
SCORE_BEFORE_CUTOFF = Fraction(7, 16)
FINAL_ERROR_BOUND = Fraction(1, 3)
MIN_TRIALS = 10 ** 4


def _is_exact(values):
    return all(isinstance(v, (int, Fraction)) for v in values)


def _combine_counts(predictions, counts):
    """
    预测 predictions[j] 出现 counts[j] 次时的合并结果
    同时出现 0 和 1 时返回 1/2；只出现 0 返回 0；只出现 1 返回 1
    """
    present = [q for q, c in zip(predictions, counts) if c > 0]
    if not present:
        raise ValueError("至少需要一个预测")
    exact = _is_exact(present)
    has_zero = any(q == 0 for q in present)
    has_one = any(q == 1 for q in present)
    if has_zero and has_one:
        return Fraction(1, 2) if exact else 0.5
    if has_zero:
        return Fraction(0) if exact else 0.0
    if has_one:
        return Fraction(1) if exact else 1.0
    if exact:
        product = Fraction(1)
        for q, c in zip(predictions, counts):
            if c > 0:
                product *= ((1 - Fraction(q)) / Fraction(q)) ** c
        return 1 / (1 + product)
    log_product = sum(c * math.log((1 - float(q)) / float(q)) for q, c in zip(predictions, counts) if c > 0)
    return float(expit(-log_product))


def combine(predictions):
    """φ^(k) = (1 + ∏(1−qᵢ)/qᵢ)⁻¹，0/1 冲突时为 1/2"""
    predictions = list(predictions)
    if not predictions:
        raise ValueError("combine 需要至少一个预测")
    for q in predictions:
        if not 0 <= q <= 1:
            raise ValueError(f"预测必须在 [0,1] 内: {q}")
    return _combine_counts(predictions, [1] * len(predictions))


def _compositions(total, parts):
    """所有和为 total 的 parts 元非负整数组"""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _multinomial(counts):
    result = 1
    remaining = sum(counts)
    for c in counts:
        result *= math.comb(remaining, c)
        remaining -= c
    return result


@dataclass(frozen=True)
class AmplifiedForecast:
    """
    在同一输入上独立运行 base 共 k 次，再用 combine 合并预测
    不展开 k 重乘积树，而是对分支分布做精确的多项式展开求期望
    """
    base: object
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise PreconditionError(f"重复次数 k 必须 ≥ 1: {self.k}")

    def outcomes(self, x):
        grouped = {}
        for p, q, queries in self.base.outcomes(x):
            if p == 0:
                continue
            grouped[(q, queries)] = grouped.get((q, queries), 0) + p
        keys = list(grouped)
        probs = [grouped[key] for key in keys]
        predictions = [q for q, _ in keys]
        result = []
        for counts in _compositions(self.k, len(keys)):
            weight = _multinomial(counts)
            for p, c in zip(probs, counts):
                weight *= p ** c
            queries = sum(c * qs for (_, qs), c in zip(keys, counts))
            result.append((weight, _combine_counts(predictions, counts), queries))
        return result


@dataclass(frozen=True)
class BernoulliForecast:
    """叶子仍保存预测 q，但输出是从 Bernoulli(q) 采样的比特"""
    base: object
    bernoulli_output: bool = field(default=True, init=False)

    def outcomes(self, x):
        return self.base.outcomes(x)

    def output_probability(self, x):
        """Pr[输出 1]"""
        return sum(p * q for p, q, _ in self.outcomes(x))


def amplified_tree(randomized, k):
    return AmplifiedForecast(randomized, k)


def bias_to_forecast(randomized, gamma):
    """
    布尔叶子 b 改写为 (1 ± γ)/2：b = 1 → (1+γ)/2，b = 0 → (1−γ)/2
    代价不变；若最坏偏差 ≥ γ，则最坏 hs 得分 ≥ 1 − √(1−γ²)
    """
    if not 0 < gamma <= 1:
        raise PreconditionError(f"γ 必须在 (0,1] 内: {gamma}")
    for tree in randomized.trees():
        if any(leaf.prediction not in (0, 1) for leaf in trees.leaves(tree)):
            raise PreconditionError("bias_to_forecast 需要叶子全为 0/1 的布尔树")
    gamma = Fraction(gamma) if isinstance(gamma, (int, Fraction)) else gamma
    return randomized.relabel(lambda b: (1 + gamma) / 2 if b == 1 else (1 - gamma) / 2)


def forecast_to_bias(algorithm):
    return BernoulliForecast(algorithm)


def amp_bounds(x, k):
    """返回 (½·min{kx,1}, 1−(1−x)^k, min{kx,1})"""
    if not 0 <= x <= 1:
        raise ValueError(f"x 必须在 [0,1] 内: {x}")
    if k < 1:
        raise ValueError(f"k 必须 ≥ 1: {k}")
    upper = min(k * x, 1)
    return upper / 2, 1 - (1 - x) ** k, upper


def ratio_bound(algorithm, f):
    """max_x cost(R,x) / score_hs(R,x)⁺；某个输入得分 ≤ 0 时为 +∞"""
    worst = 0.0
    for x in f.domain:
        c = float(trees.input_cost(algorithm, x))
        s = trees.input_score(algorithm, f, x, 'hs')
        worst = max(worst, safe_ratio(c, max(s, 0.0)))
    return worst


def majority_amplify(randomized, gamma):
    """
    偏差 γ 的布尔算法 → 偏差 ≥ 1/2 的算法：
    bias_to_forecast → 重复 k = ⌈2/γ²⌉ 次 → forecast_to_bias
    """
    if gamma <= 0:
        raise PreconditionError(f"γ 必须为正: {gamma}")
    gamma = Fraction(gamma) if isinstance(gamma, (int, Fraction)) else gamma
    k = math.ceil(2 / gamma ** 2)
    logger.debug("majority_amplify: γ=%s, k=%d", gamma, k)
    return forecast_to_bias(amplified_tree(bias_to_forecast(randomized, gamma), k))


# ---------- 里程表放大（蒙特卡洛） ----------

@dataclass
class OdometerReport:
    Y: float
    trials: int
    seed: int
    query_cap: int
    sigma: float
    per_input: list
    worst_input_error_estimate: float
    worst_input_query_estimate: int

    def passed(self):
        error_ok = self.worst_input_error_estimate <= float(FINAL_ERROR_BOUND) + 3 * self.sigma
        return error_ok and self.worst_input_query_estimate <= self.query_cap

    def to_dict(self):
        return {
            'Y': self.Y,
            'trials': self.trials,
            'seed': self.seed,
            'query_cap': self.query_cap,
            'sigma': self.sigma,
            'error_bound': str(FINAL_ERROR_BOUND),
            'worst_input_error_estimate': self.worst_input_error_estimate,
            'worst_input_query_estimate': self.worst_input_query_estimate,
            'per_input': self.per_input,
            'status': 'pass' if self.passed() else 'fail',
        }


def _truncated_runs(randomized, x, Y):
    """R′ 在 x 上的分支：(概率, 查询次数, 预测)，超过 2Y 次查询的分支截断为 1/2"""
    budget = math.floor(TRUNCATE_FACTOR * Y)
    probs, queries, preds = [], [], []
    for p, q, used in randomized.outcomes(x):
        if used > TRUNCATE_FACTOR * Y:
            used, q = budget, 0.5
        probs.append(float(p))
        queries.append(used)
        preds.append(float(q))
    probs = np.array(probs)
    return probs / probs.sum(), np.array(queries, dtype=np.int64), np.array(preds)


def _simulate_batch(rng, probs, queries, preds, outcome, Y, size):
    """模拟 size 次完整的三阶段构造，返回 (错误次数, 查询总数, 最大查询数)"""
    m = len(probs)
    threshold = PHASE_ONE_FACTOR * Y
    cap = math.floor(FINAL_CUTOFF_FACTOR * Y)
    mean_cost = float(np.dot(probs, queries))
    chunk = int(min(4096, max(64, 2 * threshold / mean_cost)))

    # 第一阶段：运行 R′ 直到累计查询数达到 10Y，L 为所需次数
    runs = np.zeros(size, dtype=np.int64)
    spent = np.zeros(size, dtype=np.int64)
    done = np.zeros(size, dtype=bool)
    while not done.all():
        active = np.flatnonzero(~done)
        draws = rng.choice(m, size=(len(active), chunk), p=probs)
        cum = spent[active, None] + np.cumsum(queries[draws], axis=1)
        reached = cum >= threshold
        hit = reached.any(axis=1)
        first = reached.argmax(axis=1)
        rows = active[hit]
        runs[rows] += first[hit] + 1
        spent[rows] = cum[hit, first[hit]]
        done[rows] = True
        rows = active[~hit]
        runs[rows] += chunk
        spent[rows] = cum[~hit, -1]

    # 第二阶段：再运行 L 次并合并预测
    counts = rng.multinomial(runs, probs)
    total = spent + counts @ queries
    zero, one = preds == 0, preds == 1
    interior = ~(zero | one)
    log_ratio = np.log((1 - preds[interior]) / preds[interior])
    prediction = expit(-(counts[:, interior] @ log_ratio))
    has_zero = counts[:, zero].sum(axis=1) > 0
    has_one = counts[:, one].sum(axis=1) > 0
    prediction[has_zero] = 0.0
    prediction[has_one] = 1.0
    prediction[has_zero & has_one] = 0.5

    # 第三阶段：超过 240Y 次查询的运行截断为 1/2
    cut = total > cap
    prediction[cut] = 0.5
    total[cut] = cap

    output = rng.random(size) < prediction
    errors = int(np.count_nonzero(output != bool(outcome)))
    return errors, int(total.sum()), int(total.max())


def odometer_amplifier(randomized, f, Y, trials, seed, threads=1, batch_size=2000):
    """
    对 Dom(f) 中每个输入模拟里程表构造，报告经验错误率和查询次数

    参数:
        randomized: 预测随机树 R，要求 max_x cost(R,x)/score(R,x)⁺ ≤ Y
        Y: 比值上界
        trials: 每个输入的试验次数（≥ 10⁴）
        seed: 64 位种子；每个 (输入, 批次) 用 SeedSequence 派生一个 Philox 流，
              结果与线程数无关
    """
    if trials < MIN_TRIALS:
        raise PreconditionError(f"trials 至少为 {MIN_TRIALS}: {trials}")
    if not Y > 0 or math.isinf(Y):
        raise PreconditionError(f"Y 必须是正的有限数: {Y}")
    actual = ratio_bound(randomized, f)
    if math.isinf(actual):
        raise PreconditionError("R 在某个输入上的 hs 得分 ≤ 0，不存在有限的 Y")
    if actual > Y * (1 + 1e-9):
        logger.warning("给定的 Y=%s 小于 R 的真实比值 %s，构造的保证不再成立", Y, actual)

    batches = [min(batch_size, trials - start) for start in range(0, trials, batch_size)]
    per_input = []
    for input_index, x in enumerate(f.domain):
        probs, queries, preds = _truncated_runs(randomized, x, Y)
        if float(np.dot(probs, queries)) == 0:
            raise PreconditionError(f"R′ 在输入 {x} 上不做任何查询，第一阶段无法结束")
        outcome = f.value(x)

        def _job(batch_index):
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, input_index, batch_index])))
            return _simulate_batch(rng, probs, queries, preds, outcome, Y, batches[batch_index])

        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            results = list(pool.map(_job, range(len(batches))))
        errors = sum(r[0] for r in results)
        total_queries = sum(r[1] for r in results)
        max_queries = max(r[2] for r in results)
        row = {
            'input': x,
            'error_estimate': errors / trials,
            'mean_queries': total_queries / trials,
            'max_queries': max_queries,
        }
        logger.debug("odometer %s: %s", x, row)
        per_input.append(row)

    sigma = math.sqrt(float(FINAL_ERROR_BOUND) * (1 - float(FINAL_ERROR_BOUND)) / trials)
    return OdometerReport(
        Y=float(Y),
        trials=trials,
        seed=seed,
        query_cap=math.floor(FINAL_CUTOFF_FACTOR * Y),
        sigma=sigma,
        per_input=per_input,
        worst_input_error_estimate=max(r['error_estimate'] for r in per_input),
        worst_input_query_estimate=max(r['max_queries'] for r in per_input),
    )
