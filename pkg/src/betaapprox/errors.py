"""Exception hierarchy. Every error carries a stable ``code`` string."""


class BetaError(Exception):
    code = "ERROR"

    def __init__(self, detail: str = ""):
        super().__init__(detail or self.code)
        self.detail = detail


class ParseError(BetaError):
    code = "PARSE_ERROR"


class NotMonicError(BetaError):
    code = "NOT_MONIC"


class PrecisionUnreachable(BetaError):
    code = "PRECISION_UNREACHABLE"


class DomainError(BetaError):
    code = "DOMAIN"


class BudgetExceeded(BetaError):
    code = "BUDGET_EXCEEDED"


class BudgetExhaustedNoMilestone(BetaError):
    code = "BUDGET_EXHAUSTED_NO_MILESTONE"


class ZeroPsiError(BetaError):
    code = "ZERO_PSI"


class IncompatibleSupport(BetaError):
    code = "INCOMPATIBLE_SUPPORT"
