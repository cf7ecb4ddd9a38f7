"""Exception hierarchy. Every computation error derives from ThinsetError."""


class ThinsetError(ValueError):
    pass


class ParseError(ThinsetError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class NotSievedForm(ThinsetError):
    pass


class NotHomogeneous(ThinsetError):
    pass


class NotMonicInY(ThinsetError):
    pass


class ZeroPolynomial(ThinsetError):
    pass


class BadCharacteristic(ThinsetError):
    pass


class OrderNotDividing(ThinsetError):
    pass


class TableTooLarge(ThinsetError):
    pass


class ScanTooLarge(ThinsetError):
    pass


class ZeroModP(ThinsetError):
    pass


class ZeroNormal(ThinsetError):
    pass


class DegenerateInX1(ThinsetError):
    pass


class DiscriminantVanishes(ThinsetError):
    pass


class SingularModP(ThinsetError):
    pass


class EmptySet(ThinsetError):
    pass


class PairBudgetExceeded(ThinsetError):
    pass
