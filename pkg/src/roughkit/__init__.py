"""roughkit: variation and Besov norms, sewing, Young and rough differential equations on grids."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConsistencyError,
    DiagnosticError,
    DivergenceError,
    GridTooCoarseError,
    HorizonTooLongError,
    ParameterError,
    RoughkitError,
)
from .core import Control, GridPath, Partition, TimeGrid, TwoParamField, delta  # noqa: F401
