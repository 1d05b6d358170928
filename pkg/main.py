"""
===========================
APP: SS-LHS-gPC Estimator
===========================

What it does:
- Estimates E[f(Y)] for Y uniform on [0,1]^d with a sequence of stratified LHS estimators.
- Refines the strata one bisection at a time using local gPC / Sobol sensitivities.
- Combines the stages by inverse-variance weighting.
- Benchmarks the estimator against plain LHS and standard Monte Carlo.

Author: Sudharshan TK \n
License: GPLv3
"""
from app import main


if __name__ == "__main__":
    raise SystemExit(main())
