"""cdle: a kernel type checker and evaluator for the Calculus of
Dependent Lambda Eliminations, with a checkable derivation corpus."""

import sys

# the corpus's normal forms nest deeply enough to outgrow the default
sys.setrecursionlimit(100_000)

__version__ = "0.1.0"
