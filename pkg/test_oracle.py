# test_oracle.py
"""
测试脚本：确定性 / 随机 / 分布复杂度的穷举预言机
"""

import itertools
from fractions import Fraction

import pytest

from core import oracle, trees
from core.errors import PreconditionError
from core.foundation import InputDistribution, PartialFunction
from utils import catalog

GAMMAS = [Fraction(i, 10) for i in range(1, 11)]


@pytest.mark.parametrize("f, expected", [
    (catalog.constant(2, 0), 0),
    (catalog.xor(2), 2),
    (catalog.trivial(2), 1),
    (catalog.and_(2), 2),
    (catalog.xor(3), 3),
])
def test_det_complexity(f, expected):
    assert oracle.det_complexity(f) == expected


def test_randomized_worst_examples():
    assert oracle.randomized_worst(catalog.xor(2), Fraction(1, 3)).value == 2
    assert oracle.randomized_worst(catalog.constant(2, 1), Fraction(1, 3)).value == 0
    # 三棵深度 1 的树各取 1/3，每个输入上至多错 1/3
    assert oracle.randomized_worst(catalog.and_(2), Fraction(1, 3)).value == 1
    assert oracle.randomized_worst(catalog.and_(2), 0).value == 2
    with pytest.raises(PreconditionError):
        oracle.randomized_worst(catalog.xor(2), Fraction(1, 2))


@pytest.mark.parametrize("f", [catalog.and_(2), catalog.or_(2), catalog.maj(3), catalog.xor(2)])
def test_randomized_witness_meets_error_bound(f):
    eps = Fraction(1, 3)
    report = oracle.randomized_worst(f, eps)
    witness = report.witness
    assert max(trees.depth(t) for t in witness.trees()) <= report.value
    for x in f.domain:
        # 错误率 = (1 − bias) / 2
        assert (1 - trees.input_bias(witness, f, x)) / 2 <= eps


def test_distributional_examples():
    xor2 = catalog.xor(2)
    assert oracle.distributional(xor2, InputDistribution.uniform(xor2), 1).value == 2
    assert oracle.distributional(xor2, InputDistribution.uniform(xor2), Fraction(1, 2)).value == 1

    trivial = catalog.trivial(2)
    assert oracle.distributional(trivial, InputDistribution.uniform(trivial), 1).value == 1

    # 常数 0 的叶子在均匀分布下已有偏差 1/2
    and2 = catalog.and_(2)
    assert oracle.distributional(and2, InputDistribution.uniform(and2), Fraction(1, 4)).value == 0


def test_distributional_witness():
    f = catalog.maj(3)
    mu = InputDistribution.from_weights(f, [3, 1, 1, 2, 2, 1, 1, 3])
    for gamma in GAMMAS:
        report = oracle.distributional(f, mu, gamma)
        witness = report.witness
        assert len(witness.trees()) <= 2
        assert trees.cost(witness, mu) == report.value
        assert trees.bias(witness, mu) >= gamma
        for tree in witness.trees():
            assert all(leaf.prediction in (0, 1) for leaf in trees.leaves(tree))


def test_distributional_preconditions():
    f = catalog.xor(2)
    mu = InputDistribution.uniform(f)
    with pytest.raises(PreconditionError):
        oracle.distributional(f, mu, 0)
    with pytest.raises(PreconditionError):
        oracle.distributional(f, mu, Fraction(3, 2))
    with pytest.raises(PreconditionError):
        oracle.distributional(catalog.and_(2), mu, Fraction(1, 2))


@pytest.mark.parametrize("f", [catalog.xor(2), catalog.and_(3), catalog.maj(3), catalog.trivial(3)])
def test_distributional_is_monotone_and_sandwiched(f):
    """关于 γ 单调不减，并且不超过确定性复杂度"""
    mu = InputDistribution.uniform(f)
    values = [oracle.distributional(f, mu, gamma).value for gamma in GAMMAS]
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert values[-1] <= oracle.det_complexity(f)
    assert all(v >= 0 for v in values)


def small_functions():
    """n ≤ 2 上所有非常数的部分布尔函数（每个输入取 0、1 或不在定义域里）"""
    functions = []
    for n in (1, 2):
        inputs = [''.join(bits) for bits in itertools.product('01', repeat=n)]
        for assignment in itertools.product((None, 0, 1), repeat=len(inputs)):
            domain = [x for x, v in zip(inputs, assignment) if v is not None]
            values = [v for v in assignment if v is not None]
            if len(set(values)) == 2:
                functions.append(PartialFunction.create(n, 2, domain, values))
    return functions


def mu_grid(f, steps=10):
    """定义域上分母为 steps 的所有分布"""
    size = len(f.domain)
    for cut in itertools.combinations(range(steps + size - 1), size - 1):
        bounds = (-1,) + cut + (steps + size - 1,)
        counts = [bounds[i + 1] - bounds[i] - 1 for i in range(size)]
        yield InputDistribution(f, tuple(Fraction(c, steps) for c in counts))


SMALL_FUNCTIONS = small_functions()


def test_small_function_family():
    assert len(SMALL_FUNCTIONS) == 2 + 50
    assert catalog.xor(2) in SMALL_FUNCTIONS and catalog.and_(2) in SMALL_FUNCTIONS


@pytest.mark.parametrize("f", SMALL_FUNCTIONS, ids=lambda f: f"{f.n}:{''.join(f.domain)}:{''.join(map(str, f.values))}")
def test_yao_direction_and_sandwich(f):
    """
    在 1/10 网格的每个 μ 上：分布复杂度（γ = 1 − 2ε 的期望代价、错误 ≤ ε 的最坏深度）不超过 R_ε(f)；
    网格上最坏深度版本的最大值与 R_ε(f) 相差不超过 1
    """
    eps = Fraction(1, 3)
    randomized = oracle.randomized_worst(f, eps).value
    best_depth = 0
    for mu in mu_grid(f):
        assert oracle.distributional(f, mu, 1 - 2 * eps).value <= randomized
        depth = oracle.distributional_depth(f, mu, eps).value
        assert depth <= randomized
        best_depth = max(best_depth, depth)
    assert randomized - 1 <= best_depth <= randomized


def test_distributional_depth_examples():
    f = catalog.xor(2)
    assert oracle.distributional_depth(f, InputDistribution.uniform(f), Fraction(1, 3)).value == 2
    assert oracle.distributional_depth(f, InputDistribution.point_mass(f, '00'), 0).value == 0


def test_verify_avg_worst():
    f = catalog.xor(2)
    report = oracle.verify_avg_worst(f, InputDistribution.uniform(f), GAMMAS)
    assert report.passed
    assert report.randomized_complexity == 2
    assert [row['gamma'] for row in report.rows] == GAMMAS
    assert report.rows[-1]['bound'] == Fraction(2, 500)


def test_verify_avg_worst_point_mass_fails():
    """点质量分布下一片叶子就够了，不满足下界"""
    f = catalog.xor(2)
    report = oracle.verify_avg_worst(f, InputDistribution.point_mass(f, '00'), GAMMAS)
    assert not report.passed
    assert all(row['status'] == 'fail' for row in report.rows)
