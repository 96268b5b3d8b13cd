"""A self-contained SMT-LIB2 solver for quantified linear integer arithmetic.

Decides Bool/Int formulas with arbitrary quantifier nesting:

- quantifiers are removed innermost-first by Cooper's elimination procedure;
- the remaining ground problem is decided by a small CDCL loop whose theory
  solver runs an exact rational simplex with branch-and-bound over integers.

The solver speaks enough of SMT-LIB2 to serve as the external solver process
of the model-checking backend (declare-const, assert, push/pop, check-sat,
get-value/get-model) and is installed as the ``hmlmc-smt`` console script.
"""

from hmlmc.solver.api import SolverContext

__all__ = ["SolverContext"]
