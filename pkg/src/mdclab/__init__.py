"""Verification toolkit for a multidimensionally consistent linear lattice.

Modules
-------
params     lattice parameters, derived constants, parameter identities
lattice    quad-equation solves, Lagrangian 2-form, cube closure
reduction  3-point staircase reduction, commuting maps, 1-form structure
p3         period-3 reduction: coupled oscillators, invariants in involution
oscgauss   exact oscillatory Gaussian kernel calculus
qprop1d    discrete propagators, time-path independence, operator invariant
qsurface   surface propagators, local moves, coefficient uniqueness
harness    seeded suite runner with JSON reports
"""

from .params import LatticeParams, DerivedParams, derive

__all__ = ["LatticeParams", "DerivedParams", "derive"]
__version__ = "0.1.0"
