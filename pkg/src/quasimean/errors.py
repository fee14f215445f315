class QuasiMeanError(Exception):
    pass


class DomainError(QuasiMeanError, ValueError):
    """The tuple lies outside the function's domain."""


class BracketError(QuasiMeanError, ValueError):
    """A generator inverse was requested outside the generator's range on its bracket."""


class GeneratorError(QuasiMeanError, ValueError):
    """A generator is not strictly increasing on its bracket."""


class CatalogError(QuasiMeanError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class EmptyDomain(QuasiMeanError, ValueError):
    """Rejection sampling never produced a point inside the domain."""


class ContractViolation(QuasiMeanError, RuntimeError):
    """An iteration observed a hypothesis failing on its own trace."""


class ParseError(QuasiMeanError, ValueError):
    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} at position {position}")
        self.position = position


class ArityError(QuasiMeanError, ValueError):
    pass


class Diverged(QuasiMeanError, ArithmeticError):
    """An iteration moved in the direction its hypotheses rule out."""
