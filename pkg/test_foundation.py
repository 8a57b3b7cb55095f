# test_foundation.py
"""
测试脚本：部分函数、输入分布与扩展实数约定
"""

import math
from fractions import Fraction

import pytest

from core.errors import PreconditionError
from core.foundation import InputDistribution, PartialFunction, expectation, is_balanced, safe_ratio
from utils import catalog


def test_from_callable_builds_sorted_truth_table():
    """XOR₂ 的真值表按字典序排列"""
    f = catalog.xor(2)
    assert f.domain == ('00', '01', '10', '11')
    assert f.values == (0, 1, 1, 0)
    assert f.value('10') == 1
    assert '11' in f and '2' not in f


def test_create_sorts_domain_and_rejects_duplicates():
    f = PartialFunction.create(2, 2, ['11', '00'], [1, 0])
    assert f.domain == ('00', '11')
    assert f.values == (0, 1)
    with pytest.raises(ValueError):
        PartialFunction.create(2, 2, ['00', '00'], [0, 1])


@pytest.mark.parametrize("domain, values", [
    (['0'], [0]),            # 长度不对
    (['02'], [1]),           # 符号不在字母表里
    (['00'], [2]),           # 函数值不是 0/1
    ([], []),                # 空定义域
])
def test_invalid_functions(domain, values):
    with pytest.raises(ValueError):
        PartialFunction.create(2, 2, domain, values)


def test_constant_detection():
    assert catalog.constant(2, 0).is_constant()
    assert not catalog.trivial(3).is_constant()


def test_uniform_and_point_mass():
    f = catalog.and_(2)
    mu = InputDistribution.uniform(f)
    assert mu['01'] == Fraction(1, 4)
    assert mu.mass_of(1) == Fraction(1, 4)
    point = InputDistribution.point_mass(f, '11')
    assert point.support() == ['11']


def test_weights_must_sum_to_one_exactly():
    f = catalog.xor(2)
    with pytest.raises(ValueError):
        InputDistribution(f, (Fraction(1, 3),) * 4)
    with pytest.raises(ValueError):
        InputDistribution(f, (Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(-1, 2)))
    mu = InputDistribution.from_weights(f, [1, 1, 2, 0])
    assert mu.weights == (Fraction(1, 4), Fraction(1, 4), Fraction(1, 2), Fraction(0))


def test_conditional_and_balance():
    f = catalog.xor(2)
    mu = InputDistribution.uniform(f)
    balanced, imbalance = is_balanced(mu)
    assert balanced and imbalance == 0
    mu1 = mu.conditional(1)
    assert mu1.support() == ['01', '10']
    assert mu1['01'] == Fraction(1, 2)

    skewed = InputDistribution.from_weights(f, [3, 1, 0, 0])
    balanced, imbalance = is_balanced(skewed)
    assert not balanced and imbalance == Fraction(-1, 4)
    with pytest.raises(PreconditionError):
        InputDistribution.point_mass(f, '00').conditional(1)


def test_extended_real_conventions():
    """r/0 = +∞，0/0 = +∞，概率为 0 的 −∞ 项不参与期望"""
    assert safe_ratio(2.0, 0.0) == math.inf
    assert safe_ratio(0.0, 0.0) == math.inf
    assert safe_ratio(3.0, -1.0) == math.inf
    assert safe_ratio(1.0, 4.0) == 0.25
    assert expectation([(0, -math.inf), (1, 0.5)]) == 0.5
    assert expectation([(Fraction(1, 2), -math.inf), (Fraction(1, 2), 1.0)]) == -math.inf
