# test_lp.py
"""
测试脚本：精确单纯形与 Pareto 下凸包络
"""

from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from core import lp, trees
from core.foundation import InputDistribution
from core.lp import LinearProgram
from test_trees import det
from utils import catalog


def test_simple_optimum():
    program = LinearProgram([1], sense='max', constraints=[([1], '<=', 3)])
    result = lp.solve(program)
    assert isinstance(result, lp.Optimal)
    assert result.value == 3
    assert result.primal == (3,)
    assert result.dual_objective == result.value


def test_infeasible_has_farkas_certificate():
    program = LinearProgram([1], constraints=[([1], '>=', 1), ([1], '<=', 0)])
    result = lp.solve(program)
    assert isinstance(result, lp.Infeasible)
    assert lp.verify_farkas(program, result.certificate)


def test_unbounded_ray():
    program = LinearProgram([1, 1], sense='max', constraints=[([1, -1], '<=', 0)])
    result = lp.solve(program)
    assert isinstance(result, lp.Unbounded)
    x, y = result.ray
    assert x - y <= 0
    assert x >= 0 and y >= 0
    assert x + y > 0


def test_bounds_and_equalities():
    """自由变量、负下界与等式约束"""
    program = LinearProgram(
        [1, 2], sense='min',
        constraints=[([1, 1], '=', 1)],
        bounds=[(None, None), (-1, 4)],
    )
    result = lp.solve(program)
    assert isinstance(result, lp.Optimal)
    # x = 1 − y，目标 1 + y，y 取下界 −1
    assert result.primal == (2, -1)
    assert result.value == 0
    assert lp.constraint_residuals(program, result.primal) == [0]


def test_invalid_programs():
    with pytest.raises(ValueError):
        LinearProgram([1], sense='maximize')
    with pytest.raises(ValueError):
        LinearProgram([1, 2], constraints=[([1], '<=', 1)])
    with pytest.raises(ValueError):
        LinearProgram([1], constraints=[([1], '<', 1)])
    with pytest.raises(ValueError):
        LinearProgram([1], bounds=[(2, 1)])


def test_to_text_lists_every_row():
    program = LinearProgram([1, -1], constraints=[([1, 1], '<=', 2)])
    text = program.to_text()
    assert text.splitlines()[0] == "min 1 -1"
    assert "1 1 <= 2" in text


def test_agrees_with_floating_solver():
    """随机有界 LP 上与 scipy 的结果一致，并且残差精确非负、强对偶成立"""
    rng = np.random.default_rng(17)
    for _ in range(40):
        c = [int(v) for v in rng.integers(-5, 6, 3)]
        rows = [[int(v) for v in rng.integers(-4, 5, 3)] for _ in range(2)]
        rhs = [int(v) for v in rng.integers(0, 10, 2)]
        program = LinearProgram(
            c, sense='max',
            constraints=[(row, '<=', b) for row, b in zip(rows, rhs)],
            bounds=[(0, 5)] * 3,
        )
        result = lp.solve(program)
        assert isinstance(result, lp.Optimal)
        assert all(r >= 0 for r in lp.constraint_residuals(program, result.primal))
        assert result.dual_objective == result.value
        reference = linprog([-v for v in c], A_ub=rows, b_ub=rhs, bounds=[(0, 5)] * 3, method='highs')
        assert float(result.value) == pytest.approx(-reference.fun, abs=1e-7)


def test_envelope_examples():
    envelope = lp.pareto_lower_envelope([(0, 0), (1, 2)])
    assert envelope(Fraction(1, 2)) == 1
    assert envelope(0) == 0
    weights = envelope.witness(Fraction(1, 2))
    assert sorted(w for w, _ in weights) == [Fraction(1, 2), Fraction(1, 2)]

    single = lp.pareto_lower_envelope([(1, 2)])
    assert single(Fraction(1, 3)) == 2
    assert single(1) == 2
    assert lp.pareto_lower_envelope([(Fraction(1, 2), 1)])(Fraction(3, 4)) == float('inf')
    with pytest.raises(ValueError):
        lp.pareto_lower_envelope([])


def test_envelope_drops_dominated_points():
    envelope = lp.pareto_lower_envelope([(0, 0), (Fraction(1, 2), 3), (1, 2)])
    assert [b for b, _, _ in envelope.breakpoints] == [0, 1]
    assert envelope(Fraction(1, 2)) == 1


def test_envelope_is_monotone_and_convex():
    rng = np.random.default_rng(4)
    points = [(Fraction(int(b), 20), Fraction(int(c), 4))
              for b, c in zip(rng.integers(0, 21, 30), rng.integers(0, 20, 30))]
    points.append((Fraction(0), Fraction(0)))
    envelope = lp.pareto_lower_envelope(points)
    gammas = [Fraction(i, 50) for i in range(51) if Fraction(i, 50) <= envelope.max_bias]
    values = [envelope(g) for g in gammas]
    assert all(a <= b for a, b in zip(values, values[1:]))
    for a, b, c in zip(values, values[1:], values[2:]):
        assert b <= (a + c) / 2
    # 包络不超过任何单个点
    for bias, cost in points:
        assert envelope(bias) <= cost


def test_xor3_envelope_over_all_trees():
    """均匀分布下 XOR₃ 要达到偏差 1 必须查完 3 位"""
    f = catalog.xor(3)
    mu = InputDistribution.uniform(f)
    points = []
    for tree in trees.enumerate_boolean_trees(3):
        algorithm = det(tree)
        points.append((trees.bias(algorithm, mu), trees.cost(algorithm, mu)))
    envelope = lp.pareto_lower_envelope(points)
    assert envelope(1) == 3
    assert envelope.max_bias == 1
