"""Bethe Ansatz equations, Miura opers and Gaudin hamiltonians.

The submodules are layered: ``rootdata`` (Cartan matrices, Weyl group),
``ratfun`` (polynomials, rational functions, Laurent jets), ``bethe``
(equations and solver), ``miura`` (Cartan connections and scalar opers),
``operforms`` (matrix opers and canonical forms), ``repro`` (reproduction
and populations), ``gaudin`` (Verma modules and Bethe vectors) and ``cli``.
"""

from .bethe import (BetheProblem, BetheSolution, classify_cell, multi_start_solve,
                    newton_solve, residual, residue_at_infinity)
from .errors import GaudinOpersError
from .miura import (CartanConnection, connection_from_solution, miura_scalar_oper,
                    regularity_report)
from .rootdata import GeneralizedCartanMatrix, load_cartan

__version__ = "0.1.0"

__all__ = [
    "BetheProblem", "BetheSolution", "CartanConnection", "GaudinOpersError",
    "GeneralizedCartanMatrix", "classify_cell", "connection_from_solution",
    "load_cartan", "miura_scalar_oper", "multi_start_solve", "newton_solve",
    "regularity_report", "residual", "residue_at_infinity",
]
