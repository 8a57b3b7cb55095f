# core/polyamp.py
"""
单变量多项式放大

- jackson_approx：Jackson 阻尼的 Chebyshev 截断，误差 ≤ 6·K/n
- amp_small_to_const：把 [γ,1] 映到 [1/3,1] 的奇多项式，次数 ≤ 13/γ
- amp_const_to_small：多数投票多项式 p = 1 − 2q，把 [1/3,1] 映到 [1−ε,1]

系数保存在 Chebyshev 基下（高次多项式的单项式系数会大到无法用双精度求值），
求值用 Clenshaw 递推；JSON 里同时写出单项式系数（to_monomial），低次时可以用 Horner 核对
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import chebyshev, polynomial
from scipy.stats import binom

from core.errors import ApproximationError, PreconditionError

logger = logging.getLogger(__name__)

GRID_POINTS = 10 ** 4
GRID_SLACK = 1e-9
JACKSON_CONSTANT = 6
# 在 [−1,1] 上采样目标函数时用的插值次数下限
INTERPOLATION_DEGREE = 1024


@dataclass(frozen=True)
class UnivariatePolynomial:
    """Chebyshev 基下的系数，低次在前"""
    coefficients: tuple

    def __post_init__(self):
        coefficients = tuple(float(c) for c in self.coefficients) or (0.0,)
        object.__setattr__(self, 'coefficients', coefficients)

    @staticmethod
    def from_monomial(coefficients):
        return UnivariatePolynomial(tuple(chebyshev.poly2cheb(np.asarray(coefficients, dtype=float))))

    def to_monomial(self):
        return tuple(float(c) for c in chebyshev.cheb2poly(np.asarray(self.coefficients)))

    def eval_monomial(self, x):
        """按单项式系数做 Horner 嵌套求值；高次时不如 Clenshaw 稳定，只用于核对"""
        return polynomial.polyval(x, np.asarray(self.to_monomial()))

    @property
    def degree(self):
        nonzero = [i for i, c in enumerate(self.coefficients) if c != 0]
        return nonzero[-1] if nonzero else 0

    def __call__(self, x):
        return chebyshev.chebval(x, np.asarray(self.coefficients))


def eval_poly(p, x):
    return float(p(x))


def grid(points=GRID_POINTS):
    return np.linspace(-1.0, 1.0, points)


def _sample(target, xs):
    values = np.asarray(target(xs), dtype=float)
    if values.shape != xs.shape:
        values = np.array([float(target(x)) for x in xs])
    return values


def grid_error(p, target, points=GRID_POINTS):
    xs = grid(points)
    return float(np.max(np.abs(p(xs) - _sample(target, xs))))


def jackson_damping(n):
    """Jackson 核的阻尼因子 g_0..g_n"""
    N = n + 1
    k = np.arange(N)
    theta = math.pi / (N + 1)
    return ((N - k + 1) * np.cos(k * theta) + np.sin(k * theta) / math.tan(theta)) / (N + 1)


def jackson_approx(target, n, lipschitz):
    """
    次数 ≤ n 的多项式逼近，要求在 10⁴ 点网格上误差 ≤ 6K/n

    先在高次 Chebyshev 节点上插值得到 Chebyshev 系数，截断到 n 次后乘以
    Jackson 阻尼因子；返回的就是阻尼后的多项式，误差超界时抛 ApproximationError
    """
    if n < 1:
        raise PreconditionError(f"次数 n 必须 ≥ 1: {n}")
    degree = max(INTERPOLATION_DEGREE, 8 * n)
    coefficients = chebyshev.chebinterpolate(lambda xs: _sample(target, xs), degree)[:n + 1]
    p = UnivariatePolynomial(tuple(coefficients * jackson_damping(n)))
    error = grid_error(p, target)
    bound = JACKSON_CONSTANT * lipschitz / n
    logger.debug("jackson n=%d: 网格误差 %.3e, 界 %.3e", n, error, bound)
    if error > bound + GRID_SLACK:
        raise ApproximationError(f"网格误差 {error:.3e} 超过 6K/n = {bound:.3e}", error)
    return p


def clamp_target(gamma):
    """α(x) = clip(2x/(3γ), −2/3, 2/3)，Lipschitz 常数 2/(3γ)"""
    if not 0 < gamma < 1:
        raise PreconditionError(f"γ 必须在 (0,1) 内: {gamma}")
    slope = 2.0 / (3.0 * gamma)

    def target(xs):
        return np.clip(slope * np.asarray(xs, dtype=float), -2.0 / 3.0, 2.0 / 3.0)

    return target, slope


def _odd_part(p):
    return UnivariatePolynomial(tuple(c if i % 2 else 0.0 for i, c in enumerate(p.coefficients)))


def amp_small_to_const(gamma):
    """
    [−1,1]→[−1,1]，[γ,1]→[1/3,1]，[−1,−γ]→[−1,−1/3]
    对 clamp_target 做 n = ⌈12/γ⌉ 次 Jackson 逼近，误差 ≤ 1/3，再取奇部分
    """
    target, lipschitz = clamp_target(gamma)
    n = math.ceil(12 / gamma)
    p = _odd_part(jackson_approx(target, n, lipschitz))
    xs = grid()
    values = p(xs)
    ok = (
        np.all(np.abs(values) <= 1 + GRID_SLACK)
        and np.all(values[xs >= gamma] >= 1 / 3 - GRID_SLACK)
        and np.all(values[xs <= -gamma] <= -1 / 3 + GRID_SLACK)
    )
    if not ok:
        raise ApproximationError(f"γ={gamma} 的放大多项式没有通过网格检查", grid_error(p, target))
    logger.info("amp_small_to_const: γ=%s, 次数 %d (13/γ = %.1f)", gamma, p.degree, 13 / gamma)
    return p


def majority_rounds(eps):
    """k = ⌈log(1/ε)/log(9/8)⌉"""
    if not 0 < eps < Fraction(2, 3):
        raise PreconditionError(f"ε 必须在 (0, 2/3) 内: {eps}")
    return max(1, math.ceil(math.log(1 / float(eps)) / math.log(9 / 8)))


def majority_tail(k, x):
    """q(x) = Pr[2k+1 枚正面概率 (1+x)/2 的硬币中至多 k 枚正面]，x 为 Fraction 时精确"""
    m = 2 * k + 1
    heads = (1 + x) / 2
    tails = (1 - x) / 2
    return sum(math.comb(m, i) * heads ** i * tails ** (m - i) for i in range(k + 1))


def majority_tail_grid(k, xs):
    """q 在网格上的浮点值"""
    return binom.cdf(k, 2 * k + 1, (1 + np.asarray(xs, dtype=float)) / 2)


def _binomial_power(i, j):
    """(1+x)^i (1−x)^j 的整数单项式系数"""
    coefficients = [1]
    for sign, times in ((1, i), (-1, j)):
        for _ in range(times):
            shifted = [0] + coefficients
            coefficients = [a + sign * b for a, b in zip(coefficients + [0], shifted)]
    return coefficients


def _monomial_to_chebyshev(coefficients):
    """xʲ = 2^{1−j} Σ_l C(j,l) T_{j−2l}（T₀ 项再减半），精确有理数"""
    result = [Fraction(0)] * len(coefficients)
    for j, a in enumerate(coefficients):
        if a == 0:
            continue
        if j == 0:
            result[0] += a
            continue
        for l in range(j // 2 + 1):
            r = j - 2 * l
            weight = Fraction(math.comb(j, l), 2 ** (j - 1))
            if r == 0:
                weight /= 2
            result[r] += a * weight
    return result


def amp_const_to_small(eps):
    """
    p = 1 − 2q，次数 2k+1，k = ⌈log(1/ε)/log(9/8)⌉
    单项式系数用整数精确展开，再精确换到 Chebyshev 基，最后转成浮点
    """
    k = majority_rounds(eps)
    m = 2 * k + 1
    q = [Fraction(0)] * (m + 1)
    for i in range(k + 1):
        for d, c in enumerate(_binomial_power(i, m - i)):
            q[d] += math.comb(m, i) * c
    q = [Fraction(c, 2 ** m) for c in q]
    monomial = [-2 * c for c in q]
    monomial[0] += 1
    p = UnivariatePolynomial(tuple(float(c) for c in _monomial_to_chebyshev(monomial)))

    xs = grid()
    values = p(xs)
    ok = (
        np.all(np.abs(values) <= 1 + GRID_SLACK)
        and np.all(values[xs >= 1 / 3] >= 1 - float(eps) - GRID_SLACK)
    )
    if not ok:
        raise ApproximationError(f"ε={eps} 的多数投票多项式没有通过网格检查", float(np.max(np.abs(values))))
    logger.info("amp_const_to_small: ε=%s, k=%d, 次数 %d", eps, k, p.degree)
    return p
