"""Padé approximants of Lerch functions in exact arithmetic.

Modules:

* ``exact_core``: rationals, polynomials, interval reals, heights
* ``operators``: the diagonal operators on K[t] and the kernel maps phi
* ``pade``: the approximants and their order check
* ``determinant``: the non-vanishing determinant and its closed forms
* ``criterion``: V, the measure exponent and constant, threshold tables
* ``numeric``: high-precision values and numeric cross-checks
* ``cli``: the command-line front end
"""

from .exact_core import BigFloat, Poly, rat
from .pade import Instance, PadeSystem, verify_order
from .criterion import CriterionInput, compute_measure, compute_V
from .numeric import eval_lerch

__version__ = "0.1.0"

__all__ = [
    "BigFloat", "Poly", "rat", "Instance", "PadeSystem", "verify_order",
    "CriterionInput", "compute_V", "compute_measure", "eval_lerch",
]
