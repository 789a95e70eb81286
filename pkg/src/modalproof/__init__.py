"""Sequent-calculus kernel and proof transformations for intuitionistic modal logics."""

import sys

# Proof ladders nest formulas a thousand levels deep; the structural
# recursions over formulas need headroom above the default limit.
if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)

__version__ = "0.1.0"
