"""
==========================
Methods Module
==========================

Numerical core of the sequential stratified LHS estimator.

Features:
- `stratification`: hyperrectangular strata, bisection and validation.
- `sampling`: reproducible streams, uniform and Latin Hypercube samples.
- `gpc`: local orthonormal bases and least-squares gPC fits.
- `sobol`: Sobol decompositions, effective dimensions and refinement scores.
- `estimators`: stage estimates, baselines and inverse-variance weighting.
- `driver`: the sequential refinement loop and its trace.

Usage:
>>> from app.methods.driver import RunConfig, run_sequential

*Author: Sudharshan TK*\n
*Created: 2025-09-04*
"""
