"""bjkit: backjumping constraint-search toolkit.

A trail/handler-frame engine in which thrown balls rewind search to a
keyed frame while carrying a conflict payload, used by two solvers:
conflict-directed backjumping graph colouring, and a CDCL SAT solver
with watched literals, implication graphs and learnt-clause
reinstatement.
"""

from bjkit.engine import Ball, Engine, Frame, SearchStats, Throw, UncaughtBallError
from bjkit.cnf import CnfInstance, brute_force, emit_dimacs, entails, gen_random_3sat, parse_dimacs

__all__ = [
    "Ball",
    "Engine",
    "Frame",
    "SearchStats",
    "Throw",
    "UncaughtBallError",
    "CnfInstance",
    "brute_force",
    "emit_dimacs",
    "entails",
    "gen_random_3sat",
    "parse_dimacs",
]

__version__ = "0.1.0"
