"""Exception hierarchy shared by the solver modules."""


class NetCurrencyError(Exception):
    """Base class for all library errors."""


class SingularMatrix(NetCurrencyError):
    pass


class NoConvergence(NetCurrencyError):
    def __init__(self, message, best=None, gap=None):
        super().__init__(message)
        self.best = best
        self.gap = gap


class NotDecreasing(NetCurrencyError):
    pass


class ParseError(NetCurrencyError):
    def __init__(self, line, reason):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class SelfLoop(ParseError):
    pass


class DuplicateEdge(ParseError):
    pass


class NegativeWeight(ParseError):
    pass


class DecayTooLarge(NetCurrencyError):
    def __init__(self, lam, limit):
        super().__init__(f"decay {float(lam):.12g} must be below 1/r(w) = {float(limit):.12g}")
        self.lam = lam
        self.limit = limit


class BetaTooSmall(NetCurrencyError):
    def __init__(self, beta, bound):
        super().__init__(f"beta = {float(beta):.12g} is below the validity bound {float(bound):.12g}")
        self.beta = beta
        self.bound = bound


class NodeSetMismatch(NetCurrencyError):
    pass


class NoIssuerIn(NetCurrencyError):
    def __init__(self, message="no issuer internationalizes its currency"):
        super().__init__(message)


class DerivativeAtZero(NetCurrencyError):
    pass


class BudgetExceeded(NetCurrencyError):
    def __init__(self, projected, cap):
        super().__init__(
            f"projected {projected:.3g} leaf allocations exceeds the cap {cap:.3g}"
        )
        self.projected = projected
        self.cap = cap


class NotComparable(NetCurrencyError):
    pass


class ConfigError(NetCurrencyError):
    pass
