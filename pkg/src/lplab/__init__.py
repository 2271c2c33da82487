"""Numerical Littlewood-Paley theory for lacunary sequences on the circle."""

from .kernels import de_la_vallee_poussin, dirichlet_block, extremal_fM, extremal_fN, fejer, random_analytic
from .multipliers import SignVector, mikhlin_constant, randomized_sum, sharp_symbol, smoothed_symbol
from .sequences import (
    LacunarySequence,
    construct_near_ratio,
    decompose_into_lacunary,
    ratio,
    refine,
    sigma,
    sigma_block_example,
)
from .square_function import domination_check, randomized_operator, square_function, square_function_2d
from .torus import TrigPoly, TrigPoly2D, evaluate, llogl_norm, lp_norm, weak_l1

__version__ = "0.1.0"
