# ui/cli.py
"""
命令行界面模块
把各个核心模块绑定成子命令，输出带运行清单（manifest）的 JSON 报告

退出码：0 成功且所有验证通过；1 验证失败（报告照常写出）；2 用法或输入错误
"""

import argparse
import logging
import math
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction

from config.settings import Settings
from core import amplify, distances, oracle, polyamp, scoring, solver, trees
from core.errors import (ApproximationError, ConstantFunctionError, ConvergenceError,
                         EnumerationLimitError, ParseError, PreconditionError)
from core.foundation import InputDistribution
from utils import catalog, parser

logger = logging.getLogger(__name__)

VERSION = '1.0.0'

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    """出错时抛异常而不是直接退出，方便 run() 统一处理退出码"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ParseError(f"{self.prog}: {message}")


def _rational(text):
    try:
        value = parser.parse_number(text, exact=True)
    except ParseError as e:
        raise argparse.ArgumentTypeError(str(e)) from e
    if isinstance(value, float):
        raise argparse.ArgumentTypeError(f"需要有限的有理数: {text}")
    return value


def _rational_list(text):
    return [_rational(part) for part in text.split(',') if part.strip()]


class Context:
    """一次运行的共享状态：设置、读入的文件摘要、命令行"""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.inputs = {}
        self.settings = Settings(args.config)
        self.settings.override(seed=getattr(args, 'seed', None), threads=getattr(args, 'threads', None))

    def load(self, path):
        data, digest = parser.load_json(path)
        self.inputs[path] = digest
        return data

    def function(self):
        name = self.args.function
        if not name:
            raise ParseError("需要 --function")
        if not os.path.exists(name):
            f = catalog.builtin(name)
            if f is not None:
                return f
        return parser.parse_function(self.load(name))

    def distribution(self, f):
        if self.args.mu:
            return parser.parse_distribution(self.load(self.args.mu), f)
        return InputDistribution.uniform(f)

    def randomized(self, f):
        if not self.args.tree:
            raise ParseError("需要 --tree")
        return parser.parse_randomized(self.load(self.args.tree), f)

    def certificate(self, f):
        if not self.args.cert:
            raise ParseError("需要 --cert")
        return parser.parse_certificate(self.load(self.args.cert), f)

    def manifest(self):
        return {
            'argv': self.argv,
            'inputs': dict(sorted(self.inputs.items())),
            'seed': self.settings.get('seed'),
            'version': VERSION,
            'wall_clock': datetime.now(timezone.utc).isoformat(),
        }


# ---------- scores / distances ----------

def cmd_scores_eval(ctx):
    args = ctx.args
    return {'rule': args.rule, 'q': args.q, 'value': scoring.eval_rule(args.rule, float(args.q)), 'status': 'pass'}


def cmd_scores_proper(ctx):
    args = ctx.args
    steps = args.grid_steps or ctx.settings.get('grid_steps')
    check = scoring.check_proper(args.rule, float(args.p), steps)
    return {'rule': args.rule, 'p': args.p, 'argmax': check.argmax, 'maximizers': check.maximizers,
            'passed': check.passed, 'status': 'pass'}


def cmd_distances_eval(ctx):
    pair = parser.parse_pair(ctx.load(ctx.args.pair))
    measures = [ctx.args.measure] if ctx.args.measure else list(distances.MEASURES)
    rows = []
    for rule, measure in distances.RULE_TO_MEASURE.items():
        if measure not in measures:
            continue
        value = distances.distance(pair, measure)
        best = distances.max_score(pair, rule)
        rows.append({'measure': measure, 'rule': rule, 'distance': value, 'max_score': best,
                     'status': 'pass' if abs(value - best) <= 1e-9 else 'fail'})
    return {'rows': rows}


# ---------- amplify ----------

def cmd_amplify_odometer(ctx):
    args = ctx.args
    f = ctx.function()
    algorithm = ctx.randomized(f)
    if args.gamma is not None:
        algorithm = amplify.bias_to_forecast(algorithm, args.gamma)
    Y = float(args.Y) if args.Y is not None else amplify.ratio_bound(algorithm, f)
    report = amplify.odometer_amplifier(
        algorithm, f, Y,
        trials=args.trials or ctx.settings.get('trials'),
        seed=int(ctx.settings.get('seed')),
        threads=ctx.settings.threads(),
    )
    return report.to_dict()


def cmd_amplify_bounds(ctx):
    lower, middle, upper = amplify.amp_bounds(float(ctx.args.x), ctx.args.k)
    ok = lower <= middle + 1e-15 and middle <= upper + 1e-15
    return {'x': ctx.args.x, 'k': ctx.args.k, 'lower': lower, 'amplified': middle, 'upper': upper,
            'status': 'pass' if ok else 'fail'}


def cmd_amplify_majority(ctx):
    args = ctx.args
    f = ctx.function()
    algorithm = ctx.randomized(f)
    if args.gamma is None:
        raise ParseError("需要 --gamma")
    before = trees.worst_case_bias(algorithm, f)
    amplified = amplify.majority_amplify(algorithm, args.gamma)
    after = trees.worst_case_bias(amplified, f)
    return {'gamma': args.gamma, 'k': amplified.base.k, 'bias_before': before, 'bias_after': after,
            'status': 'pass' if before < args.gamma or after >= Fraction(1, 2) else 'fail'}


# ---------- oracle ----------

def cmd_oracle_det(ctx):
    f = ctx.function()
    return {'kind': 'deterministic', 'value': oracle.det_complexity(f), 'status': 'pass'}


def _complexity(report):
    return {'kind': report.kind, 'value': report.value, 'witness': report.witness,
            'parameters': report.parameters, 'status': 'pass'}


def cmd_oracle_rworst(ctx):
    f = ctx.function()
    eps = ctx.args.eps if ctx.args.eps is not None else _rational(ctx.settings.get('eps'))
    return _complexity(oracle.randomized_worst(f, eps))


def cmd_oracle_dist(ctx):
    f = ctx.function()
    if ctx.args.gamma is None:
        raise ParseError("需要 --gamma")
    mu = ctx.distribution(f)
    report = _complexity(oracle.distributional(f, mu, ctx.args.gamma))
    report['mu'] = mu
    return report


# ---------- solver / verify ----------

def _certificate_report(cert):
    report = parser.serialize_certificate(cert)
    report['status'] = 'pass' if cert.converged else 'fail'
    return report


def _solve(ctx, f):
    args = ctx.args
    return solver.solve_hard(
        f,
        tol=args.tol if args.tol is not None else ctx.settings.get('tol'),
        max_iter=args.max_iter or ctx.settings.get('max_iter'),
        score_floor=ctx.settings.get('score_floor'),
        max_denominator=ctx.settings.get('max_denominator'),
    )


def cmd_solve_hard(ctx):
    return _certificate_report(_solve(ctx, ctx.function()))


def _verification(report):
    return {'name': report.name, 'randomized_complexity': report.randomized_complexity,
            'bound': report.bound, 'min_ratio': report.min_ratio, 'rows': report.rows,
            'status': 'pass' if report.passed else 'fail'}


def _avg_worst(report):
    return {'name': 'avg-worst', 'randomized_complexity': report.randomized_complexity,
            'rows': report.rows, 'status': 'pass' if report.passed else 'fail'}


def _gammas(ctx):
    if ctx.args.gammas:
        return ctx.args.gammas
    return [_rational(g) for g in ctx.settings.get('gammas')]


def cmd_verify_shaltiel(ctx):
    f = ctx.function()
    return _verification(solver.verify_shaltiel_free(f, solver.split(ctx.certificate(f))))


def cmd_verify_ratio_bound(ctx):
    f = ctx.function()
    return _verification(solver.verify_ratio_bound(f, ctx.certificate(f)))


def cmd_verify_avg_worst(ctx):
    f = ctx.function()
    mu = ctx.certificate(f).mu if ctx.args.cert else ctx.distribution(f)
    return _avg_worst(oracle.verify_avg_worst(f, mu, _gammas(ctx)))


def cmd_suite(ctx):
    f = ctx.function()
    cert = _solve(ctx, f)
    r = oracle.randomized_worst(f, _rational(ctx.settings.get('eps'))).value
    ratio = _verification(solver.verify_ratio_bound(f, cert, r))
    shaltiel = _verification(solver.verify_shaltiel_free(f, solver.split(cert), r))
    avg = _avg_worst(oracle.verify_avg_worst(f, cert.mu, _gammas(ctx), r))
    sections = {'certificate': _certificate_report(cert), 'ratio_bound': ratio,
                'shaltiel': shaltiel, 'avg_worst': avg}
    passed = all(section['status'] == 'pass' for section in sections.values())
    sections['status'] = 'pass' if passed else 'fail'
    sections['rows'] = avg['rows']
    return sections


# ---------- polyamp ----------

def _grid_values(p):
    xs = polyamp.grid()
    values = p(xs)
    return float(values.min()), float(values.max())


def _polynomial_report(p, extra):
    low, high = _grid_values(p)
    report = parser.serialize_polynomial(p)
    report.update({'grid_min': low, 'grid_max': high, 'status': 'pass'})
    report.update(extra)
    return report


def cmd_polyamp_const_to_small(ctx):
    eps = ctx.args.eps
    if eps is None:
        raise ParseError("需要 --eps")
    k = polyamp.majority_rounds(eps)
    p = polyamp.amp_const_to_small(eps)
    bound = 17 * math.log2(1 / float(eps))
    tail_ok = polyamp.majority_tail(k, Fraction(1, 3)) <= Fraction(1, 3) * Fraction(8, 9) ** k
    report = _polynomial_report(p, {'eps': eps, 'k': k, 'degree_bound': bound})
    report['status'] = 'pass' if p.degree <= bound and tail_ok else 'fail'
    return report


def cmd_polyamp_small_to_const(ctx):
    gamma = ctx.args.gamma
    if gamma is None:
        raise ParseError("需要 --gamma")
    p = polyamp.amp_small_to_const(float(gamma))
    report = _polynomial_report(p, {'gamma': gamma, 'degree_bound': 13 / float(gamma),
                                    'relaxed_degree_bound': 26 / float(gamma)})
    report['status'] = 'pass' if p.degree <= 26 / float(gamma) else 'fail'
    return report


def cmd_polyamp_jackson(ctx):
    args = ctx.args
    gamma, n = args.gamma, args.degree
    if gamma is None or n is None:
        raise ParseError("需要 --gamma 和 --degree")
    target, lipschitz = polyamp.clamp_target(float(gamma))
    if args.lipschitz is not None:
        lipschitz = float(args.lipschitz)
    p = polyamp.jackson_approx(target, n, lipschitz)
    return _polynomial_report(p, {'gamma': gamma, 'lipschitz': lipschitz, 'error': polyamp.grid_error(p, target),
                                  'bound': polyamp.JACKSON_CONSTANT * lipschitz / n})


# ---------- 参数解析 ----------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--function', help='函数 JSON 文件')
    common.add_argument('--mu', help='输入分布 JSON 文件（默认均匀分布）')
    common.add_argument('--tree', help='预测树 JSON 文件')
    common.add_argument('--cert', help='solve-hard 输出的证书')
    common.add_argument('--tol', type=float)
    common.add_argument('--max-iter', type=int, dest='max_iter')
    common.add_argument('--eps', type=_rational)
    common.add_argument('--gamma', type=_rational)
    common.add_argument('--gammas', type=_rational_list, help='逗号分隔的 γ 列表')
    common.add_argument('--seed', type=int)
    common.add_argument('--trials', type=int)
    common.add_argument('--out', help='报告输出路径（默认打印到标准输出）')
    common.add_argument('--csv', help='把表格行另存为 CSV')
    common.add_argument('--config', help='设置 JSON 文件')
    common.add_argument('--verbose', action='store_true')

    root = _Parser(prog='forecast', description='预测算法与随机查询复杂度工具')
    root.add_argument('--version', action='version', version=VERSION)
    commands = root.add_subparsers(dest='command', required=True, parser_class=_Parser)

    def group(name, help_text):
        sub = commands.add_parser(name, help=help_text)
        return sub.add_subparsers(dest='action', required=True, parser_class=_Parser)

    scores = group('scores', '评分规则')
    p = scores.add_parser('eval', parents=[common])
    p.add_argument('--rule', required=True, choices=scoring.RULES)
    p.add_argument('--q', required=True, type=_rational)
    p.set_defaults(handler=cmd_scores_eval)
    p = scores.add_parser('proper', parents=[common])
    p.add_argument('--rule', required=True, choices=scoring.RULES)
    p.add_argument('--p', required=True, type=_rational)
    p.add_argument('--grid-steps', type=int, dest='grid_steps')
    p.set_defaults(handler=cmd_scores_proper)

    dist = group('distances', '距离度量')
    p = dist.add_parser('eval', parents=[common])
    p.add_argument('--pair', required=True)
    p.add_argument('--measure', choices=distances.MEASURES)
    p.set_defaults(handler=cmd_distances_eval)

    amp = group('amplify', '放大')
    p = amp.add_parser('odometer', parents=[common])
    p.add_argument('--Y', type=_rational, help='比值上界（默认按树精确计算）')
    p.add_argument('--threads', type=int, help='蒙特卡洛并行线程数（0 表示全部 CPU）')
    p.set_defaults(handler=cmd_amplify_odometer)
    p = amp.add_parser('bounds', parents=[common])
    p.add_argument('--x', required=True, type=_rational)
    p.add_argument('--k', required=True, type=int)
    p.set_defaults(handler=cmd_amplify_bounds)
    p = amp.add_parser('majority', parents=[common])
    p.set_defaults(handler=cmd_amplify_majority)

    orc = group('oracle', '复杂度预言机')
    for name, handler in (('rworst', cmd_oracle_rworst), ('dist', cmd_oracle_dist), ('det', cmd_oracle_det)):
        orc.add_parser(name, parents=[common]).set_defaults(handler=handler)

    p = commands.add_parser('solve-hard', parents=[common], help='求困难分布')
    p.set_defaults(handler=cmd_solve_hard)

    ver = group('verify', '验证下界')
    for name, handler in (('shaltiel', cmd_verify_shaltiel), ('ratio-bound', cmd_verify_ratio_bound),
                          ('avg-worst', cmd_verify_avg_worst)):
        ver.add_parser(name, parents=[common]).set_defaults(handler=handler)

    poly = group('polyamp', '多项式放大')
    poly.add_parser('const-to-small', parents=[common]).set_defaults(handler=cmd_polyamp_const_to_small)
    poly.add_parser('small-to-const', parents=[common]).set_defaults(handler=cmd_polyamp_small_to_const)
    p = poly.add_parser('jackson', parents=[common])
    p.add_argument('--degree', type=int)
    p.add_argument('--lipschitz', type=_rational, help='声称的 Lipschitz 常数（默认取 clamp 目标的 2/(3γ)）')
    p.set_defaults(handler=cmd_polyamp_jackson)

    p = commands.add_parser('suite', parents=[common], help='solve-hard 加全部验证')
    p.set_defaults(handler=cmd_suite)
    return root


def _emit(ctx, report):
    report = dict(report)
    report['manifest'] = ctx.manifest()
    if ctx.args.out:
        parser.write_json(ctx.args.out, report)
    else:
        print(parser.dumps(report))
    if ctx.args.csv:
        parser.write_csv(ctx.args.csv, report.get('rows', []))


def run(argv):
    """解析参数并执行子命令，返回退出码"""
    argv = list(argv)
    try:
        args = build_parser().parse_args(argv)
    except ParseError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        ctx = Context(args, argv)
        report = args.handler(ctx)
    except ConvergenceError as e:
        print(f"⚠️ {e}", file=sys.stderr)
        _emit(ctx, _certificate_report(e.certificate))
        return EXIT_FAIL
    except ApproximationError as e:
        print(f"⚠️ {e}", file=sys.stderr)
        _emit(ctx, {'error': str(e), 'achieved': e.achieved, 'status': 'fail'})
        return EXIT_FAIL
    except (ParseError, PreconditionError, ConstantFunctionError, EnumerationLimitError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as e:
        print(f"❌ 输入错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as e:
        print(f"❌ 运行失败: {e}", file=sys.stderr)
        _emit(ctx, {'error': str(e), 'status': 'fail'})
        return EXIT_FAIL

    _emit(ctx, report)
    failed = report.get('status') == 'fail' or any(
        row.get('status') == 'fail' for row in report.get('rows', []) if isinstance(row, dict))
    return EXIT_FAIL if failed else EXIT_OK
