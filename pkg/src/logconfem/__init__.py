"""Stabilized finite elements for steady viscoelastic Oldroyd-B flow.

The constitutive law is solved in its logarithmic-conformation form, which
stays regular down to zero relaxation time, so Newton continuation can start
from the Newtonian solution. Three residual-based stabilized formulations
(SUPG, GLS, ASGS) share one equal-order P1/Q1 discretization.
"""

from .params import PhysicalParams
from . import sym2

__all__ = ["PhysicalParams", "sym2"]

__version__ = "0.1.0"
