# core/lp.py
"""
精确有理数线性规划

单纯形法（稠密 Fraction 表格，两阶段，Bland 规则防循环），
以及二维的 Pareto 下凸包络（分布复杂度只有两个非平凡约束，不需要一般 LP）

标准形：min c·z, A z = b, z ≥ 0, b ≥ 0
原变量的上下界通过平移/反射/拆分变成 z ≥ 0，有限上界变成额外的行
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

logger = logging.getLogger(__name__)

RELATIONS = ('<=', '=', '>=')


@dataclass
class LinearProgram:
    """
    参数:
        objective: 目标系数
        sense: 'min' 或 'max'
        constraints: [(系数行, 关系, 右端), ...]，关系取 '<=' / '=' / '>='
        bounds: 每个变量的 (下界, 上界)，None 表示无界；默认全部为 (0, None)
    """
    objective: list
    sense: str = 'min'
    constraints: list = field(default_factory=list)
    bounds: Optional[list] = None

    def __post_init__(self):
        self.objective = [Fraction(c) for c in self.objective]
        width = len(self.objective)
        if self.sense not in ('min', 'max'):
            raise ValueError(f"sense 只能是 min 或 max: {self.sense}")
        rows = []
        for row, relation, rhs in self.constraints:
            if len(row) != width:
                raise ValueError(f"约束行宽 {len(row)} 与目标维数 {width} 不一致")
            if relation not in RELATIONS:
                raise ValueError(f"未知的约束关系: {relation}")
            rows.append(([Fraction(a) for a in row], relation, Fraction(rhs)))
        self.constraints = rows
        if self.bounds is None:
            self.bounds = [(Fraction(0), None)] * width
        if len(self.bounds) != width:
            raise ValueError("bounds 的个数必须等于变量个数")
        self.bounds = [(None if lo is None else Fraction(lo), None if hi is None else Fraction(hi))
                       for lo, hi in self.bounds]
        for lo, hi in self.bounds:
            if lo is not None and hi is not None and lo > hi:
                raise ValueError(f"变量下界 {lo} 大于上界 {hi}")

    @property
    def num_vars(self):
        return len(self.objective)

    def to_text(self):
        """调试用的纯文本转储"""
        lines = [f"{self.sense} " + " ".join(str(c) for c in self.objective)]
        for row, relation, rhs in self.constraints:
            lines.append(" ".join(str(a) for a in row) + f" {relation} {rhs}")
        for j, (lo, hi) in enumerate(self.bounds):
            lines.append(f"x{j} in [{'-inf' if lo is None else lo}, {'inf' if hi is None else hi}]")
        return "\n".join(lines)


class Optimal(NamedTuple):
    value: Fraction
    primal: tuple
    dual: tuple              # 标准形每一行的对偶乘子
    dual_objective: Fraction


class Infeasible(NamedTuple):
    certificate: tuple       # 标准形每一行的 Farkas 乘子 y：yᵀA ≤ 0 且 yᵀb > 0


class Unbounded(NamedTuple):
    ray: tuple               # 原变量空间中的可行改进方向


@dataclass
class _StandardForm:
    A: list
    b: list
    c: list
    constant: Fraction
    # 原变量 j = offset[j] + Σ coef·z[k]
    mapping: list
    offsets: list
    num_structural: int


def _standardize(lp):
    """转成标准形；max 问题取负号"""
    sign = -1 if lp.sense == 'max' else 1
    mapping, offsets, extra_rows = [], [], []
    k = 0
    for lo, hi in lp.bounds:
        if lo is not None:
            mapping.append([(k, Fraction(1))])
            offsets.append(lo)
            if hi is not None:
                extra_rows.append((k, hi - lo))
            k += 1
        elif hi is not None:
            mapping.append([(k, Fraction(-1))])
            offsets.append(hi)
            k += 1
        else:
            mapping.append([(k, Fraction(1)), (k + 1, Fraction(-1))])
            offsets.append(Fraction(0))
            k += 2
    num_structural = k

    rows = []
    for row, relation, rhs in lp.constraints:
        dense = [Fraction(0)] * num_structural
        shift = Fraction(0)
        for j, a in enumerate(row):
            if a == 0:
                continue
            shift += a * offsets[j]
            for idx, coef in mapping[j]:
                dense[idx] += a * coef
        rows.append((dense, relation, rhs - shift))
    for idx, upper in extra_rows:
        dense = [Fraction(0)] * num_structural
        dense[idx] = Fraction(1)
        rows.append((dense, '<=', upper))

    num_slacks = sum(1 for _, relation, _ in rows if relation != '=')
    width = num_structural + num_slacks
    A, b = [], []
    slack = num_structural
    for dense, relation, rhs in rows:
        full = dense + [Fraction(0)] * num_slacks
        if relation == '<=':
            full[slack] = Fraction(1)
            slack += 1
        elif relation == '>=':
            full[slack] = Fraction(-1)
            slack += 1
        if rhs < 0:
            full = [-a for a in full]
            rhs = -rhs
        A.append(full)
        b.append(rhs)

    c = [Fraction(0)] * width
    constant = Fraction(0)
    for j, cj in enumerate(lp.objective):
        constant += sign * cj * offsets[j]
        for idx, coef in mapping[j]:
            c[idx] += sign * cj * coef
    return _StandardForm(A, b, c, constant, mapping, offsets, num_structural)


def _pivot(table, row, col):
    pivot = table[row][col]
    table[row] = [a / pivot for a in table[row]]
    for i, other in enumerate(table):
        if i != row and other[col] != 0:
            factor = other[col]
            table[i] = [a - factor * p for a, p in zip(other, table[row])]


def _reduced_costs(table, basis, costs):
    width = len(costs)
    duals_times = [Fraction(0)] * width
    for i, j in enumerate(basis):
        cb = costs[j]
        if cb == 0:
            continue
        for col, a in enumerate(table[i][:width]):
            if a != 0:
                duals_times[col] += cb * a
    return [costs[j] - duals_times[j] for j in range(width)]


def _simplex(table, basis, costs, allowed, debug=False):
    """
    就地迭代，返回 None 表示最优，否则返回无界方向的入基列
    Bland 规则：入基取最小下标，出基按比值再按基变量下标
    """
    rhs = len(costs)
    iterations = 0
    while True:
        reduced = _reduced_costs(table, basis, costs)
        entering = next((j for j in allowed if reduced[j] < 0), None)
        if entering is None:
            return None
        best = None
        for i, row in enumerate(table):
            if row[entering] > 0:
                ratio = row[rhs] / row[entering]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return entering
        if debug:
            logger.debug("pivot %d: 入基 %d, 出基 %d", iterations, entering, basis[best[1]])
        _pivot(table, best[1], entering)
        basis[best[1]] = entering
        iterations += 1


def solve(lp, debug=False):
    """
    两阶段单纯形，返回 Optimal / Infeasible / Unbounded
    第一阶段在每一行都放人工变量，它们的列始终留在表格里，
    最终表格中这些列就是 B⁻¹，对偶解和 Farkas 乘子都从这里读出
    """
    sf = _standardize(lp)
    m = len(sf.A)
    width = len(sf.c)
    total = width + m
    table = []
    for i in range(m):
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        table.append(sf.A[i] + art + [sf.b[i]])
    basis = list(range(width, total))

    # 第一阶段：最小化人工变量之和
    phase_one = [Fraction(0)] * width + [Fraction(1)] * m
    _simplex(table, basis, phase_one, list(range(total)), debug)
    infeasibility = sum((table[i][total] for i, j in enumerate(basis) if j >= width), Fraction(0))
    if infeasibility > 0:
        reduced = _reduced_costs(table, basis, phase_one)
        y = tuple(1 - reduced[width + i] for i in range(m))
        logger.debug("LP 不可行，第一阶段最优值 %s", infeasibility)
        return Infeasible(y)

    # 把值为 0 的人工基变量尽量换出；换不出的行是冗余行
    for i, j in enumerate(basis):
        if j >= width:
            col = next((k for k in range(width) if table[i][k] != 0), None)
            if col is not None:
                _pivot(table, i, col)
                basis[i] = col

    phase_two = sf.c + [Fraction(0)] * m
    entering = _simplex(table, basis, phase_two, list(range(width)), debug)
    if entering is not None:
        direction = [Fraction(0)] * width
        direction[entering] = Fraction(1)
        for i, j in enumerate(basis):
            if j < width:
                direction[j] = -table[i][entering]
        ray = tuple(sum((coef * direction[idx] for idx, coef in terms), Fraction(0)) for terms in sf.mapping)
        return Unbounded(ray)

    z = [Fraction(0)] * width
    for i, j in enumerate(basis):
        if j < width:
            z[j] = table[i][total]
    primal = tuple(offset + sum((coef * z[idx] for idx, coef in terms), Fraction(0))
                   for offset, terms in zip(sf.offsets, sf.mapping))
    reduced = _reduced_costs(table, basis, phase_two)
    y = [-reduced[width + i] for i in range(m)]
    sign = -1 if lp.sense == 'max' else 1
    value = sign * (sum((cj * zj for cj, zj in zip(sf.c, z)), Fraction(0)) + sf.constant)
    dual_objective = sign * (sum((bi * yi for bi, yi in zip(sf.b, y)), Fraction(0)) + sf.constant)
    return Optimal(value, primal, tuple(sign * yi for yi in y), dual_objective)


def verify_farkas(lp, certificate):
    """检查标准形上的 Farkas 乘子：yᵀA ≤ 0（逐列）且 yᵀb > 0"""
    sf = _standardize(lp)
    if len(certificate) != len(sf.A):
        return False
    for col in range(len(sf.c)):
        if sum((y * row[col] for y, row in zip(certificate, sf.A)), Fraction(0)) > 0:
            return False
    return sum((y * b for y, b in zip(certificate, sf.b)), Fraction(0)) > 0


def constraint_residuals(lp, point):
    """每条约束的松弛量（≥ 0 表示满足），等式约束返回 |残差| 的相反数"""
    out = []
    for row, relation, rhs in lp.constraints:
        lhs = sum((a * x for a, x in zip(row, point)), Fraction(0))
        if relation == '<=':
            out.append(rhs - lhs)
        elif relation == '>=':
            out.append(lhs - rhs)
        else:
            out.append(-abs(lhs - rhs))
    return out


# ---------- Pareto 下凸包络 ----------

@dataclass(frozen=True)
class Envelope:
    """
    breakpoints: 按 bias 递增的 (bias, cost, 点下标)
    在 γ 处的值 = bias ≥ γ 的所有混合中的最小期望代价
    """
    breakpoints: tuple

    @property
    def max_bias(self):
        return self.breakpoints[-1][0]

    def __call__(self, gamma):
        gamma = Fraction(gamma)
        first_bias, first_cost, _ = self.breakpoints[0]
        if gamma <= first_bias:
            return first_cost
        if gamma > self.max_bias:
            return math.inf
        for (b0, c0, _), (b1, c1, _) in zip(self.breakpoints, self.breakpoints[1:]):
            if b0 <= gamma <= b1:
                return c0 + (c1 - c0) * (gamma - b0) / (b1 - b0)
        return self.breakpoints[-1][1]

    def witness(self, gamma):
        """达到包络值的混合：[(权重, 点下标)]，至多两个点"""
        gamma = Fraction(gamma)
        first_bias, _, first_index = self.breakpoints[0]
        if gamma <= first_bias:
            return [(Fraction(1), first_index)]
        if gamma > self.max_bias:
            return []
        for (b0, _, i0), (b1, _, i1) in zip(self.breakpoints, self.breakpoints[1:]):
            if b0 <= gamma <= b1:
                lam = (b1 - gamma) / (b1 - b0)
                return [(w, i) for w, i in ((lam, i0), (1 - lam, i1)) if w > 0]
        return [(Fraction(1), self.breakpoints[-1][2])]


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def pareto_lower_envelope(points):
    """
    points: [(bias, cost), ...]
    从代价最小的点出发（代价相同取 bias 最大者），向右做下凸包（单调链）
    """
    if not points:
        raise ValueError("点集不能为空")
    pts = [(Fraction(b), Fraction(c), i) for i, (b, c) in enumerate(points)]
    min_cost = min(c for _, c, _ in pts)
    start_bias = max(b for b, c, _ in pts if c == min_cost)
    # 每个 bias 只保留代价最小的点
    best = {}
    for b, c, i in pts:
        if b >= start_bias and (b not in best or c < best[b][1]):
            best[b] = (b, c, i)
    hull = []
    for p in sorted(best.values()):
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)
    return Envelope(tuple(hull))
