"""Exception hierarchy.

Everything raised on purpose by this package derives from
:class:`GridStealthError`. The CLI maps :class:`CaseError`,
:class:`ConfigError`, :class:`ParameterError` and :class:`ShapeError` to exit
code 1 and :class:`NumericalError` to exit code 2.
"""


class GridStealthError(Exception):
    pass


class CaseError(GridStealthError, ValueError):
    """Invalid case text or a grid that cannot produce a measurement model."""


class ConfigError(GridStealthError, ValueError):
    pass


class ParameterError(GridStealthError, ValueError):
    """An argument outside its admissible range."""


class ShapeError(GridStealthError, ValueError):
    pass


class NumericalError(GridStealthError, ArithmeticError):
    """A matrix failed a definiteness requirement or a Monte Carlo estimate is unresolved."""
