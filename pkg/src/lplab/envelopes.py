"""Regression envelopes and default grids for the scans.

Only growth exponents are theory-backed; every numeric bracket below was fixed
after one pilot run and is a regression constant, not a bound with a proof.
"""

CANONICAL_LAMBDAS = (1.05, 1.08, 1.1, 1.15, 1.2, 1.25)

# denser near 1 so that A_N holds several blocks at N = 2^13
SHARPNESS_LAMBDAS = (1.02, 1.03, 1.05, 1.08, 1.1, 1.15, 1.2)
SHARPNESS_NS = tuple(2**k for k in range(8, 14))
SIGMA_GRID = (4, 8, 16, 32)
SIGMA_M = 2**13
PALEY_N = 2**13
PALEY_N_2D = 32
PALEY_2D_OVERSAMPLING = 4
KHINTCHINE_PS = (1.0, 1.2, 1.5, 2.0)
DUAL_PS = (2.5, 3.0, 4.0, 6.0, 8.0)
LAMBDA_P_PS = (2.0, 4.0, 8.0)

TRIALS = 100
SIGN_DRAWS = 200
MIN_R_SQUARED = 0.9

CARDINALITY_SLOPE = (0.85, 1.15)
CARDINALITY_R2 = 0.95
CARDINALITY_PRODUCT = (0.3, 6.0)
HALF_SLOPE = (0.35, 0.65)
LOG_N_SLOPE = (0.8, 1.2)
FLAT_SLOPE = (-0.2, 0.2)
DUAL_SLOPE = (0.0, 1.3)
DUAL_SEQ_FACTOR = 4.0
KHINTCHINE_BRACKET = (0.4, 2.5)
DIRICHLET_L1_PER_LOG = (0.3, 0.6)

ZYGMUND_FACTOR = 10.0
LAMBDA_P_MAX = 10.0
WEAK_TYPE_MAX = 20.0
MIKHLIN_C0 = 6.0
