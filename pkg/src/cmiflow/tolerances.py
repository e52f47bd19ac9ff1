"""Numerical tolerances shared across the package.

Eigenvalues in [EIG_NEG_TOL, EIG_ZERO_TOL) are treated as exact zeros by all
entropy consumers; anything below EIG_NEG_TOL fails positivity checks.
"""

EIG_NEG_TOL = -1e-8       # most negative eigenvalue tolerated in a density matrix
EIG_ZERO_TOL = 1e-12      # eigenvalues below this contribute nothing to entropy
HERM_TOL = 1e-10          # relative Frobenius tolerance for hermiticity checks
TRACE_TOL = 1e-10         # |tr(rho) - 1| tolerance
COMPLETENESS_TOL = 1e-10  # POVM / Kraus completeness tolerance
SUPPORT_TOL = 1e-10       # support threshold in relative entropy
PURIFY_RANK_TOL = 1e-10   # eigenvalues below this do not count towards rank
JACOBI_SWEEP_CAP = 100    # max sweeps of the cyclic Jacobi eigensolver
JACOBI_OFF_TOL = 1e-12    # off-diagonal threshold, relative to Frobenius norm
