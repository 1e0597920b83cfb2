"""Twin smooth integers via the Pell equations x^2 - 2 Delta y^2 = 1."""

from .arith import (SmoothnessBound, factor_with_bound, is_b_smooth, is_probable_prime,
                    primes_up_to, sieve_twin_smooth)
from .lehmer import CoefficientTriple, enumerate_all_twins, pair_from_triple, triple_from_pair
from .pell import PellSolution, fundamental_solution, nth_solution
from .poly import max_m1_bits, p_coeffs, u_coeffs, v_coeffs
from .search import SearchConfig, TwinRecord

__version__ = "0.1.0"

__all__ = [
    "SmoothnessBound", "factor_with_bound", "is_b_smooth", "is_probable_prime", "primes_up_to",
    "sieve_twin_smooth", "CoefficientTriple", "enumerate_all_twins", "pair_from_triple",
    "triple_from_pair", "PellSolution", "fundamental_solution", "nth_solution", "max_m1_bits",
    "p_coeffs", "u_coeffs", "v_coeffs", "SearchConfig", "TwinRecord",
]
