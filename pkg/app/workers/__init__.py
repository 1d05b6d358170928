"""
==========================
Worker Management Module
==========================

This module provides the background worker threads of the application.

Features:
- `TaskWorker` / `run_in_pool`: bounded thread pool with ordered results, used by the stage
  estimator (one task per stratum) and by the benchmark harness (one task per replication).

Usage:
>>> from app.workers import run_in_pool
>>> results = run_in_pool(process_stratum, strata, workers=4, thread_name="StratumWorker")

*Author: Sudharshan TK*\n
*Created: 2025-08-31*
"""

from app.workers.pool import TaskWorker, run_in_pool
