"""hmlmc: a model checker for temporal properties of smart contracts.

The package contains:

- ``contracts``: parser/typechecker for a purified Solidity fragment;
- ``properties``: parser/typechecker for CHML, a first-order Hennessy-Milner
  logic with a transaction modality;
- ``semantics``: the concrete reference interpreter (big-step, deterministic,
  revert-atomic);
- ``oracle``: a brute-force explicit-state checker over finite domains;
- ``encoder``: the translation of contract + property into a first-order
  transition system (Init/Trans) and formulas;
- ``backend``: SMT-LIB2 emission, the external-solver driver, and the BMC /
  k-induction engines;
- ``solver``: a self-contained SMT-LIB2 solver for quantified linear integer
  arithmetic, installed as the ``hmlmc-smt`` console script and used as the
  default backend solver;
- ``cli``: the ``hmlmc`` command line (verify / bench / replay).
"""

__version__ = "0.1.0"
