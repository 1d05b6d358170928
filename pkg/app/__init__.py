"""
==========================
Main Application Module
==========================

SS-LHS-gPC: sequences of stratified Latin Hypercube estimators whose strata are refined by local
gPC / Sobol sensitivities and combined by inverse-variance weighting, plus a benchmark harness
comparing them with plain LHS and standard Monte Carlo.

Usage:
>>> from app import main
>>> main(["run", "--problem", "p2", "--dprime", "2", "--d", "2", "--stages", "6"])

*Author: Sudharshan TK*
*Created: 2025-08-31*
"""


def main(argv=None) -> int:
    """Run the command-line interface and return its exit status."""
    from app.cli import main as cli_main

    return cli_main(argv)
