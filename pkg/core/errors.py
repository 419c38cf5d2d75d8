"""
错误类型

工作台所有异常都从 WorkbenchError 派生，CLI 依据类别映射退出码：
- InputError 及其子类：输入不合法（退出码 2）
- RankOverflowBudget：超出总秩预算（退出码 3）
- DegreeBeyondTrusted / NotAChainMap：代数契约被破坏
"""


class WorkbenchError(Exception):
    """工作台异常基类。"""


class InputError(WorkbenchError, ValueError):
    """输入数据不满足前置条件。"""


class RelationNotPartialOrder(InputError):
    pass


class NotAMonoid(InputError):
    pass


class ObjectOutOfRange(InputError):
    pass


class NotAFunctor(InputError):
    pass


class ElementNotInT(InputError):
    pass


class NotAField(InputError):
    pass


class ParseError(InputError):
    pass


class ValidationError(InputError):
    """结构校验失败，携带完整的 ValidationReport。"""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class DegreeBeyondTrusted(WorkbenchError):
    """请求的次数落在截断边缘之外。"""

    def __init__(self, degree: int, trusted: int):
        super().__init__(f"次数 {degree} 超出可信次数 {trusted}")
        self.degree = degree
        self.trusted = trusted


class NotAChainMap(WorkbenchError):
    pass


class RankOverflowBudget(WorkbenchError):
    """复形总秩超过配置预算。"""

    def __init__(self, requested: int, budget: int, where: str = ""):
        suffix = f"（{where}）" if where else ""
        super().__init__(f"总秩 {requested} 超出预算 {budget}{suffix}")
        self.requested = requested
        self.budget = budget
        self.where = where
