# utils/parser.py
"""
JSON 读写
函数、分布、预测树、分布对、证书与报告的数据格式都在这里

交换格式（函数、分布、树、证书）里的有理数写成 {"num": p, "den": q}；
报告里的数字写成 "p/q" 字符串，±∞ 写成 "inf" / "-inf"
"""

import csv
import hashlib
import json
import math
from fractions import Fraction

import numpy as np

from core.distances import FinitePair
from core.errors import ParseError
from core.foundation import InputDistribution, PartialFunction
from core.polyamp import UnivariatePolynomial
from core.trees import Leaf, Query, RandomizedForecastTree, validate_tree


def parse_number(value, exact=False):
    """数字、{"num","den"}、"p/q"、"inf"、"-inf" → Fraction 或 float"""
    if isinstance(value, bool):
        raise ParseError(f"不是数字: {value!r}")
    if isinstance(value, dict):
        return parse_rational(value) if exact else float(parse_rational(value))
    if isinstance(value, str):
        text = value.strip()
        if text in ('inf', '+inf'):
            return math.inf
        if text == '-inf':
            return -math.inf
        try:
            number = Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise ParseError(f"无法解析的数: {value!r}") from e
        return number if exact else float(number)
    if isinstance(value, int):
        return Fraction(value) if exact else float(value)
    if isinstance(value, float):
        return Fraction(value) if exact and math.isfinite(value) else value
    raise ParseError(f"不是数字: {value!r}")


def parse_rational(data):
    """{"num": p, "den": q} → Fraction，分母必须为正"""
    if not isinstance(data, dict) or set(data) != {'num', 'den'}:
        raise ParseError(f"有理数需要 num 与 den 两个字段: {data!r}")
    num, den = data['num'], data['den']
    if any(isinstance(v, bool) or not isinstance(v, int) for v in (num, den)):
        raise ParseError(f"num 与 den 必须是整数: {data!r}")
    if den <= 0:
        raise ParseError(f"分母必须为正: {data!r}")
    return Fraction(num, den)


def encode_rational(value):
    value = Fraction(value)
    return {'num': value.numerator, 'den': value.denominator}


def encode_number(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def to_jsonable(obj):
    """递归转换成可以 json.dump 的结构"""
    if isinstance(obj, (Leaf, Query)):
        return serialize_tree(obj)
    if isinstance(obj, RandomizedForecastTree):
        return serialize_randomized(obj)
    if isinstance(obj, PartialFunction):
        return serialize_function(obj)
    if isinstance(obj, InputDistribution):
        return serialize_distribution(obj)
    if isinstance(obj, UnivariatePolynomial):
        return to_jsonable(serialize_polynomial(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return encode_number(obj)


# ---------- 函数 ----------

def parse_function(data):
    """
    {"n": 2, "alphabet": 2, "domain": ["00", "01", "10", "11"], "values": [0, 1, 1, 0]}
    不在 domain 里的输入不属于定义域
    """
    if not isinstance(data, dict):
        raise ParseError("函数 JSON 必须是对象")
    missing = [key for key in ('n', 'domain', 'values') if key not in data]
    if missing:
        raise ParseError(f"函数 JSON 缺少字段: {', '.join(missing)}")
    domain, values = data['domain'], data['values']
    if not isinstance(domain, list) or not isinstance(values, list) or not domain:
        raise ParseError("domain 与 values 必须是非空列表")
    if len(domain) != len(values):
        raise ParseError(f"domain 有 {len(domain)} 项，values 有 {len(values)} 项")
    if any(not isinstance(x, str) for x in domain):
        raise ParseError("domain 里的输入必须是字符串")
    if any(isinstance(v, bool) or v not in (0, 1) for v in values):
        raise ParseError("函数值只能是 0 或 1")
    try:
        return PartialFunction.create(int(data['n']), int(data.get('alphabet', 2)), domain, values)
    except (ValueError, TypeError) as e:
        raise ParseError(f"函数定义不合法: {e}") from e


def serialize_function(f):
    return {
        'n': f.n,
        'alphabet': f.alphabet_size,
        'domain': list(f.domain),
        'values': list(f.values),
    }


# ---------- 分布 ----------

def parse_distribution(data, f):
    """
    {"weights": [{"num": 1, "den": 4}, ...]}，按 f 的有序定义域对齐；
    权重必须非负且恰好和为 1，不做归一化
    """
    weights = data.get('weights') if isinstance(data, dict) else None
    if not isinstance(weights, list):
        raise ParseError("分布 JSON 需要 weights 列表")
    if len(weights) != len(f.domain):
        raise ParseError(f"weights 有 {len(weights)} 项，定义域有 {len(f.domain)} 个输入")
    exact = [parse_number(w, exact=True) for w in weights]
    if any(not isinstance(w, Fraction) for w in exact):
        raise ParseError("权重必须是有限的有理数")
    if any(w < 0 for w in exact):
        raise ParseError("权重不能为负")
    if sum(exact) != 1:
        raise ParseError(f"权重之和必须恰好为 1，实际为 {sum(exact)}")
    return InputDistribution(f, tuple(exact))


def serialize_distribution(mu):
    return {
        'weights': [encode_rational(w) for w in mu.weights],
        'float_weights': [float(w) for w in mu.weights],
    }


# ---------- 预测树 ----------

def parse_tree(data):
    """叶子 {"leaf": {"num": 1, "den": 2}}，内部节点 {"query": 0, "children": [...]}；查询下标从 0 开始"""
    if isinstance(data, dict) and 'leaf' in data:
        value = data['leaf']
        return Leaf(None if value is None else parse_number(value, exact=True))
    if isinstance(data, dict) and 'query' in data:
        children = data.get('children')
        if not isinstance(children, list) or not children:
            raise ParseError("查询节点需要非空的 children 列表")
        index = data['query']
        if isinstance(index, bool) or not isinstance(index, int):
            raise ParseError(f"查询下标必须是整数: {index!r}")
        return Query(index, tuple(parse_tree(c) for c in children))
    raise ParseError(f"无法识别的树节点: {data!r}")


def serialize_tree(tree):
    if isinstance(tree, Leaf):
        return {'leaf': None if tree.prediction is None else encode_rational(tree.prediction)}
    return {'query': tree.index, 'children': [serialize_tree(c) for c in tree.children]}


def parse_randomized(data, f=None):
    """{"support": [{"p": {"num": 1, "den": 2}, "tree": {...}}, ...]}；单棵树也可以直接给出"""
    if isinstance(data, dict) and 'support' in data:
        try:
            items = [(parse_number(item['p'], exact=True), parse_tree(item['tree'])) for item in data['support']]
        except (KeyError, TypeError) as e:
            raise ParseError(f"support 的每一项需要 p 与 tree: {e}") from e
    else:
        items = [(Fraction(1), parse_tree(data))]
    try:
        if f is not None:
            for _, tree in items:
                validate_tree(tree, f.n, f.alphabet_size)
        return RandomizedForecastTree(tuple(items))
    except ValueError as e:
        raise ParseError(f"随机树不合法: {e}") from e


def serialize_randomized(randomized):
    return {'support': [{'p': encode_rational(p), 'tree': serialize_tree(t)} for p, t in randomized.support]}


# ---------- 分布对 ----------

def parse_pair(data):
    """{"support": [...], "nu0": [...], "nu1": [...], "w": 0.5}"""
    try:
        return FinitePair(
            tuple(data['support']),
            [parse_number(v) for v in data['nu0']],
            [parse_number(v) for v in data['nu1']],
            parse_number(data.get('w', 0.5)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"分布对不合法: {e}") from e


# ---------- 证书 ----------

def serialize_certificate(cert):
    return to_jsonable({
        'function': cert.function,
        'mu': cert.mu,
        'lambda_star': cert.lambda_star,
        'lower_value': cert.lower_value,
        'tolerance': cert.tolerance,
        'tol': cert.tol,
        'iterations': cert.iterations,
        'converged': cert.converged,
        'imbalance': cert.imbalance,
        'support_trees': cert.support_trees,
        'history': cert.history,
        'raw_mu': list(cert.raw_mu),
    })


def _parse_record(record):
    """支撑树与迭代记录：树字段还原成节点，"inf" 还原成 ∞"""
    parsed = {}
    for key, value in record.items():
        if key == 'tree':
            parsed[key] = parse_tree(value)
        elif isinstance(value, str):
            parsed[key] = parse_number(value)
        else:
            parsed[key] = value
    return parsed


def parse_certificate(data, f=None):
    """读回证书，返回 solver.HardDistributionCertificate；f 缺省时用证书里的函数"""
    from core.solver import HardDistributionCertificate

    if not isinstance(data, dict):
        raise ParseError("证书 JSON 必须是对象")
    try:
        if f is None:
            f = parse_function(data['function'])
        return HardDistributionCertificate(
            function=f,
            mu=parse_distribution(data['mu'], f),
            lambda_star=parse_number(data['lambda_star']),
            lower_value=parse_number(data['lower_value']),
            tolerance=parse_number(data['tolerance']),
            tol=parse_number(data['tol']),
            support_trees=[_parse_record(item) for item in data.get('support_trees', [])],
            iterations=int(data.get('iterations', 0)),
            converged=bool(data.get('converged', True)),
            imbalance=parse_number(data.get('imbalance', 0)),
            history=[_parse_record(item) for item in data.get('history', [])],
            raw_mu=tuple(parse_number(w) for w in data.get('raw_mu', [])),
        )
    except KeyError as e:
        raise ParseError(f"证书缺少字段 {e}") from e


# ---------- 多项式 ----------

def serialize_polynomial(p):
    """coefficients 是单项式系数（低次在前）；chebyshev_coefficients 是内部表示"""
    return {
        'basis': 'monomial',
        'coefficients': list(p.to_monomial()),
        'chebyshev_coefficients': list(p.coefficients),
        'degree': p.degree,
    }


def parse_polynomial(data):
    """优先用 Chebyshev 系数，只有单项式系数时再换基"""
    if not isinstance(data, dict):
        raise ParseError("多项式 JSON 必须是对象")
    try:
        if 'chebyshev_coefficients' in data:
            return UnivariatePolynomial(tuple(parse_number(c) for c in data['chebyshev_coefficients']))
        return UnivariatePolynomial.from_monomial([parse_number(c) for c in data['coefficients']])
    except (KeyError, TypeError) as e:
        raise ParseError(f"多项式需要 coefficients 列表: {e}") from e


# ---------- 文件 ----------

def load_json(path):
    """返回 (数据, sha256 摘要)"""
    try:
        with open(path, 'rb') as fh:
            raw = fh.read()
    except OSError as e:
        raise ParseError(f"无法读取 {path}: {e}") from e
    try:
        data = json.loads(raw.decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(f"{path} 不是合法的 JSON: {e}") from e
    return data, hashlib.sha256(raw).hexdigest()


def dumps(data):
    return json.dumps(to_jsonable(data), ensure_ascii=False, indent=2, sort_keys=True)


def write_json(path, data):
    with open(path, 'w', encoding='utf-8') as fh:
        fh.write(dumps(data) + "\n")


def write_csv(path, rows):
    """表格行（字典列表）写成 CSV，列按第一行的键排序"""
    rows = [to_jsonable(row) for row in rows]
    fieldnames = sorted(rows[0]) if rows else []
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, extrasaction='ignore')
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
