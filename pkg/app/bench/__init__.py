"""
==========================
Benchmark Module
==========================

Test problems, the black-box model adapter and (in `app.bench.harness`) the replication harness.

Features:
- `ModelSpec`, `build_model`, `analytic_mean`: benchmark problems and their reference values.
- `BlackboxModel`: model backed by an external process.

Usage:
>>> from app.bench import ModelSpec, build_model
>>> model = build_model(ModelSpec("p3", dimension=4))

*Author: Sudharshan TK*\n
*Created: 2025-09-07*
"""
from app.bench.blackbox import BlackboxModel, blackbox_eval
from app.bench.problems import ModelSpec, analytic_mean, build_model, eval_p1, eval_p2, eval_p3, p1_moments
