"""Python front-end for the hvi C++ core."""

from ._hvi import (
    Discretization,
    Potential,
    builtin_potentials,
    describe_potential,
    run,
    solve,
)

__all__ = [
    "Discretization",
    "Potential",
    "builtin_potentials",
    "describe_potential",
    "run",
    "solve",
]
