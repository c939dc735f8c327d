"""Numerical toolkit for positive rank-one perturbations of bi-continuous
semigroups: translation semigroup on bounded continuous functions, its
incomplete-Gamma resolvent formulas, Dyson-Phillips series construction of
the perturbed semigroup with an independent Volterra oracle, and the
finite-dimensional implemented-semigroup instance on Metzler systems.
"""

from semipert.errors import HypothesisViolation, PreconditionError

__version__ = "0.1.0"

__all__ = ["HypothesisViolation", "PreconditionError", "__version__"]
