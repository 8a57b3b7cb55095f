# core/errors.py
"""
异常类型
所有模块共用，CLI 根据类型决定退出码
"""


class ParseError(ValueError):
    """JSON 格式错误或不符合数据模式"""


class EnumerationLimitError(ValueError):
    """实例太大，无法穷举所有决策树"""


class ConstantFunctionError(ValueError):
    """常函数上极小极大定理是平凡的，求解器拒绝处理"""


class PreconditionError(ValueError):
    """操作的前置条件不满足"""


class ApproximationError(ArithmeticError):
    """多项式构造没有达到要求的误差界"""

    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = achieved


class ConvergenceError(RuntimeError):
    """双预言机循环在 max_iter 轮内没有收敛；certificate 为最后一轮的结果"""

    def __init__(self, message, certificate):
        super().__init__(message)
        self.certificate = certificate
