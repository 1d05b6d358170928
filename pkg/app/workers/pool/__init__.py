"""
==========================
Task Pool Worker Module
==========================

This module provides a bounded pool of background worker threads used to fan out independent
tasks: the per-stratum sample / fit / Sobol jobs of one stage, and the replications of a benchmark.

Features:
- Implements a `TaskWorker` class that extends `threading.Thread`.
- Collects jobs in a queue and processes them in the background.
- Joins all workers, then returns results in submission order (deterministic reductions).
- Re-raises the first failing task's exception in the caller thread.

Usage:
>>> from app.workers.pool import run_in_pool
>>> squares = run_in_pool(lambda x: x * x, range(10), workers=4, thread_name="SquareWorker")

*Author: Sudharshan TK*\n
*Created: 2025-09-06*
"""
from app.workers.pool.worker import TaskWorker, run_in_pool
