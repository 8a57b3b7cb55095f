# test_solver.py
"""
测试脚本：困难分布求解器（double oracle）、拆分与两个验证器
"""

from fractions import Fraction

import numpy as np
import pytest

from core import oracle, solver, trees
from core.errors import ConstantFunctionError, PreconditionError
from core.foundation import InputDistribution
from core.trees import Leaf
from test_trees import full_xor2_tree
from utils import catalog

TEST_FUNCTIONS = {
    'xor2': catalog.xor(2),
    'and2': catalog.and_(2),
    'or2': catalog.or_(2),
    'trivial2': catalog.trivial(2),
    'xor3': catalog.xor(3),
    'maj3': catalog.maj(3),
    'and3': catalog.and_(3),
}

_CERTS = {}


def certificate(name):
    """同一个函数只求解一次"""
    if name not in _CERTS:
        _CERTS[name] = solver.solve_hard(TEST_FUNCTIONS[name])
    return _CERTS[name]


def manual_certificate(f, mu, lambda_star, tol=1e-6):
    return solver.HardDistributionCertificate(
        function=f, mu=mu, lambda_star=lambda_star, lower_value=lambda_star,
        tolerance=tol, tol=tol, support_trees=[], iterations=0, converged=True, imbalance=0.0,
    )


def test_opt_score_examples():
    f = catalog.xor(2)
    mu = InputDistribution.uniform(f)
    score, labels = solver.opt_score(full_xor2_tree(), mu)
    assert score == pytest.approx(1.0)
    assert labels == (0.0, 1.0, 1.0, 0.0)
    score, labels = solver.opt_score(Leaf(), mu)
    assert score == pytest.approx(0.0)
    assert labels == (0.5,)


def test_opt_score_matches_posterior_labelling():
    """闭式得分等于把后验标到叶子上的 hs 得分"""
    rng = np.random.default_rng(8)
    f = catalog.maj(3)
    for _ in range(20):
        mu = InputDistribution.from_weights(f, [int(w) for w in rng.integers(1, 20, 8)])
        for shape in list(trees.enumerate_shapes(3))[::17]:
            score, labels = solver.opt_score(shape, mu)
            algorithm = trees.RandomizedForecastTree.deterministic(trees.label_shape(shape, labels))
            assert trees.score(algorithm, mu, 'hs') == pytest.approx(score, abs=1e-12)


def test_best_response_examples():
    xor2 = catalog.xor(2)
    response = solver.best_response(xor2, InputDistribution.uniform(xor2))
    assert response.ratio == pytest.approx(2.0)
    assert response.cost == pytest.approx(2.0)
    assert trees.depth(response.labelled()) == 2

    trivial = catalog.trivial(2)
    response = solver.best_response(trivial, InputDistribution.uniform(trivial))
    assert response.ratio == pytest.approx(1.0)
    assert response.cost == pytest.approx(1.0)

    # 权重向量与分布对象给出相同结果
    table = solver.shape_table(xor2)
    by_vector = solver.best_response(xor2, [0.25] * 4, table)
    assert by_vector.shape_index == solver.best_response(xor2, InputDistribution.uniform(xor2), table).shape_index


def test_solve_hard_xor2():
    cert = certificate('xor2')
    assert cert.converged
    assert cert.lambda_star == pytest.approx(2.0, abs=1e-5)
    assert cert.mu.mass_of(1) == Fraction(1, 2)
    assert cert.support_trees
    assert cert.lower_value <= cert.lambda_star + cert.tol


def test_solve_hard_trivial2():
    cert = certificate('trivial2')
    assert cert.lambda_star == pytest.approx(1.0, abs=1e-5)
    assert cert.mu.weights == (Fraction(1, 2), Fraction(1, 2))


def grid_neighbours(cert, grid_mus):
    """网格上离证书 μ 最近的点的 ℓ∞ 距离"""
    exact = cert.mu.probabilities()
    return min(float(np.max(np.abs(mu.probabilities() - exact))) for mu in grid_mus)


@pytest.mark.parametrize("name", ['xor2', 'trivial2', 'and2', 'or2'])
def test_solve_hard_agrees_with_grid(name):
    """10⁻² 网格上的蛮力搜索：λ 相差不超过 0.1，证书的 μ 离某个近似最优的网格点不超过 0.1"""
    f = TEST_FUNCTIONS[name]
    cert = certificate(name)
    grid_ratio, grid_mu = solver.grid_oracle(f, Fraction(1, 100))
    assert grid_mu.mass_of(1) == Fraction(1, 2)
    assert abs(cert.lambda_star - grid_ratio) <= 0.1
    near_optimal = solver.grid_maximizers(f, Fraction(1, 100), slack=0.1)
    assert grid_mu in near_optimal
    assert grid_neighbours(cert, near_optimal) <= 0.1


def test_grid_maximizers_include_uniform_for_xor2():
    f = catalog.xor(2)
    maximizers = solver.grid_maximizers(f, Fraction(1, 100), slack=1e-9)
    assert InputDistribution.uniform(f) in maximizers
    ratio, _ = solver.grid_oracle(f, Fraction(1, 100))
    assert ratio == pytest.approx(2.0)


@pytest.mark.parametrize("name", sorted(TEST_FUNCTIONS))
def test_solver_output_is_balanced(name):
    """LP 给出的浮点 μ 本身就在 tol 以内平衡，有理化不靠缩放掩盖偏差"""
    f = TEST_FUNCTIONS[name]
    cert = certificate(name)
    raw = np.asarray(cert.raw_mu)
    assert len(raw) == len(f.domain)
    assert raw.sum() == pytest.approx(1.0, abs=1e-7)
    assert abs(float(np.dot(raw, f.values_array())) - 0.5) <= cert.tol
    assert cert.imbalance <= cert.tol
    assert float(np.max(np.abs(cert.mu.probabilities() - raw))) <= 1e-5
    assert cert.tolerance >= cert.tol
    assert cert.lambda_star - cert.lower_value <= cert.tolerance + 1e-12
    assert cert.history and cert.history[-1]['iteration'] == cert.iterations


def test_solver_is_deterministic():
    f = catalog.maj(3)
    first = solver.solve_hard(f)
    second = solver.solve_hard(f)
    assert first.mu == second.mu
    assert first.lambda_star == second.lambda_star
    assert first.iterations == second.iterations


def test_constant_function_rejected():
    with pytest.raises(ConstantFunctionError):
        solver.solve_hard(catalog.constant(2, 0))
    with pytest.raises(ConstantFunctionError):
        solver.grid_oracle(catalog.constant(2, 1))


def test_grid_oracle_rejects_odd_resolution():
    with pytest.raises(PreconditionError):
        solver.grid_oracle(catalog.xor(2), Fraction(1, 5))


def test_rationalize_balances_classes():
    f = catalog.and_(2)
    mu = solver.rationalize(f, [1 / 6, 1 / 6, 1 / 6, 0.5])
    assert mu.mass_of(0) == mu.mass_of(1) == Fraction(1, 2)
    assert mu['00'] == Fraction(1, 6)
    assert mu['11'] == Fraction(1, 2)
    # 取整误差以内的偏差会被修正
    nudged = solver.rationalize(f, [1 / 6, 1 / 6, 1 / 6 - 4e-7, 0.5 + 4e-7], tol=1e-6)
    assert nudged.mass_of(1) == Fraction(1, 2)


def test_rationalize_rejects_unbalanced_weights():
    """偏差超过 tol 时报错，不再悄悄按类别缩放"""
    f = catalog.and_(2)
    with pytest.raises(PreconditionError):
        solver.rationalize(f, [0.2, 0.2, 0.2, 0.4])
    with pytest.raises(PreconditionError):
        solver.rationalize(f, [1 / 6, 1 / 6, 1 / 6 - 1e-4, 0.5 + 1e-4], tol=1e-6)
    with pytest.raises(PreconditionError):
        solver.rationalize(f, [0.5, 0.5, 0.0, 0.0])


def test_score_floor_scales_with_bounds():
    assert solver.derive_score_floor(2.0, 2.0, 1e-6) == pytest.approx(-4e6)
    assert solver.derive_score_floor(3.0, 3.0, 1e-6) < solver.derive_score_floor(2.0, 2.0, 1e-6)
    # 质量为 tol 的输入在 λ = 1 时贡献的量超过 max_cost + λ_hi
    floor = solver.derive_score_floor(3.0, 3.0, 1e-4)
    assert 1e-4 * -floor >= 3.0 + 3.0 - 1e-12


def test_floored_strategy_rows_stay_finite():
    """纯标签叶子在错误输入上的 −∞ 得分被换成推出的下限"""
    f = catalog.and_(2)
    table = solver.shape_table(f)
    response = solver.best_response(f, [0.5, 0.0, 0.0, 0.5], table)
    floor = solver.derive_score_floor(2.0, float(table.queries.max()), 1e-6)
    strategy = solver._strategy(table, response, floor)
    assert np.all(np.isfinite(strategy.scores))
    assert strategy.scores.min() == pytest.approx(floor)


def test_split_examples():
    pair = solver.split(certificate('trivial2'))
    assert pair.mu0 == InputDistribution.point_mass(catalog.trivial(2), '00')
    assert pair.mu1 == InputDistribution.point_mass(catalog.trivial(2), '11')

    cert = certificate('xor2')
    pair = solver.split(cert)
    assert pair.mu0.mass_of(1) == 0 and pair.mu1.mass_of(0) == 0
    assert pair.mu0['00'] == 2 * cert.mu['00']
    assert pair.mu1['01'] == 2 * cert.mu['01']


def test_split_rejects_unbalanced():
    f = catalog.xor(2)
    mu = InputDistribution.from_weights(f, [1, 1, 1, 3])
    with pytest.raises(PreconditionError):
        solver.split(manual_certificate(f, mu, 2.0))


@pytest.mark.parametrize("name", ['xor2', 'and2', 'trivial2', 'maj3'])
def test_verify_ratio_bound_passes_on_solver_output(name):
    f = TEST_FUNCTIONS[name]
    report = solver.verify_ratio_bound(f, certificate(name))
    assert report.passed
    assert report.bound == report.randomized_complexity / 240
    assert len(report.rows) == trees.count_shapes(f.n)


def test_verify_ratio_bound_negative_control():
    """μ 只放在 00 与 10 上：查 x₀ 一次就能区分，比值 1 低于声称的 λ* = 2"""
    f = catalog.xor(2)
    mu = InputDistribution.from_weights(f, [1, 0, 1, 0])
    assert mu['00'] == mu['10'] == Fraction(1, 2)
    report = solver.verify_ratio_bound(f, manual_certificate(f, mu, 2.0), randomized_complexity=2)
    assert not report.passed
    assert report.min_ratio == pytest.approx(1.0)


@pytest.mark.parametrize("name", sorted(TEST_FUNCTIONS))
def test_verify_shaltiel_free(name):
    f = TEST_FUNCTIONS[name]
    report = solver.verify_shaltiel_free(f, solver.split(certificate(name)))
    assert report.passed
    assert report.bound == report.randomized_complexity / 3000


@pytest.mark.parametrize("name", ['xor2', 'and2', 'maj3', 'xor3'])
def test_avg_worst_on_hard_distribution(name):
    f = TEST_FUNCTIONS[name]
    gammas = [Fraction(i, 10) for i in range(1, 11)]
    report = oracle.verify_avg_worst(f, certificate(name).mu, gammas)
    assert report.passed
