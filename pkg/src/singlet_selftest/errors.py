"""Exception types raised across the package."""


class SelfTestError(Exception):
    """Base class for every error raised by this package."""


class NotSelfTesting(SelfTestError):
    pass


class NotCanonical(SelfTestError):
    pass


class TooDegenerate(SelfTestError):
    pass


class SingularDenominator(SelfTestError):
    """A control-operator coefficient would divide by a vanishing sine."""

    def __init__(self, which, value):
        self.which = which
        self.value = value
        super().__init__(f"sin({which}) = {value:.3e} vanishes")


class DimensionMismatch(SelfTestError):
    pass


class UnsupportedControl(SelfTestError):
    pass


class UnhousedMoment(SelfTestError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"moment {key!r} is not an entry of any moment block")


class ZeroCorrelator(SelfTestError):
    def __init__(self, which, value):
        self.which = which
        self.value = value
        super().__init__(f"sin({which}) = {value:.3e} vanishes; the game is undefined")


class EmptyGrid(SelfTestError):
    pass
