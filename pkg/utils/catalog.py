# utils/catalog.py
"""
内置的小布尔函数：xorN、andN、orN、majN、trivialN、const0N、const1N
命令行里 --function 可以直接写这些名字代替 JSON 文件
"""

import re

from core.foundation import PartialFunction

_PATTERN = re.compile(r'^(xor|and|or|maj|trivial|const0|const1)(\d+)$')


def xor(n):
    return PartialFunction.from_callable(n, lambda x: sum(x) % 2)


def and_(n):
    return PartialFunction.from_callable(n, lambda x: int(all(x)))


def or_(n):
    return PartialFunction.from_callable(n, lambda x: int(any(x)))


def maj(n):
    return PartialFunction.from_callable(n, lambda x: int(2 * sum(x) > n))


def trivial(n):
    """只在 0ⁿ 和 1ⁿ 上有定义的部分函数"""
    return PartialFunction.create(n, 2, ['0' * n, '1' * n], [0, 1])


def constant(n, value):
    return PartialFunction.from_callable(n, lambda x: value)


def builtin(name):
    """按名字构造函数，名字不认识时返回 None"""
    match = _PATTERN.match(name.strip().lower())
    if not match:
        return None
    kind, n = match.group(1), int(match.group(2))
    if n < 1:
        return None
    if kind == 'xor':
        return xor(n)
    if kind == 'and':
        return and_(n)
    if kind == 'or':
        return or_(n)
    if kind == 'maj':
        return maj(n)
    if kind == 'trivial':
        return trivial(n)
    return constant(n, int(kind[-1]))
