"""
==========================
Command-Line Module
==========================

Command-line front end of the estimator.

Features:
- `run`: one sequential run; writes the trace JSON and prints a one-line summary.
- `convergence`: replicated variance study against LHS and SMC; writes CSVs and prints slopes.
- `report`: per-stage and per-stratum report of a trace, with optional CSV exports.

Usage:
>>> from app.cli import main
>>> main(["run", "--problem", "p2", "--dprime", "2", "--d", "2", "--stages", "6", "--seed", "7"])

*Author: Sudharshan TK*\n
*Created: 2025-09-08*
"""
from app.cli.cli import build_parser, main
