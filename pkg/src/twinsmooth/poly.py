"""Solution polynomials p_n, u_n, v_n with x_n = p_n(x_1), U_n = u_n(x_1) = v_n(m_1)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb


class NoCandidatesError(ValueError):
    """The index n is too large for any m_1 to map into the requested bit size."""


@dataclass(frozen=True)
class SolutionPolynomial:
    kind: str  # "P", "U" or "V"
    n: int
    coeffs: tuple[int, ...]  # constant term first

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1]

    def __call__(self, x: int) -> int:
        return evaluate(self, x)


def _check_index(n: int) -> None:
    if n < 1:
        raise IndexError(f"polynomial index must be >= 1, got {n}")


@lru_cache(maxsize=None)
def p_coeffs(n: int) -> SolutionPolynomial:
    _check_index(n)
    coeffs = [0] * (n + 1)
    for j in range(n // 2 + 1):
        s = sum(comb(n, 2 * i) * comb(i, j) for i in range(j, n // 2 + 1))
        coeffs[n - 2 * j] = -s if j % 2 else s
    return SolutionPolynomial("P", n, tuple(coeffs))


@lru_cache(maxsize=None)
def u_coeffs(n: int) -> SolutionPolynomial:
    _check_index(n)
    top = (n + 1) // 2 - 1  # ceil(n/2) - 1
    coeffs = [0] * n
    for j in range(top + 1):
        s = sum(comb(n, 2 * i + 1) * comb(i, j) for i in range(j, top + 1))
        coeffs[n - 1 - 2 * j] = -s if j % 2 else s
    return SolutionPolynomial("U", n, tuple(coeffs))


@lru_cache(maxsize=None)
def v_coeffs(n: int) -> SolutionPolynomial:
    """u_n(2m + 1) expanded in m."""
    u = u_coeffs(n).coeffs
    coeffs = [0] * len(u)
    for k, c in enumerate(u):
        if c:
            for l in range(k + 1):
                coeffs[l] += c * comb(k, l) << l
    return SolutionPolynomial("V", n, tuple(coeffs))


def evaluate(poly: SolutionPolynomial, x: int) -> int:
    acc = 0
    for c in reversed(poly.coeffs):
        acc = acc * x + c
    return acc


def m_n_from_m1(m1: int, n: int) -> int:
    """m_n = (p_n(2 m_1 + 1) - 1) / 2; p_n of an odd argument is odd."""
    if m1 < 0:
        raise ValueError("m_1 must be non-negative")
    return (evaluate(p_coeffs(n), 2 * m1 + 1) - 1) // 2


def max_m1_bits(b: int, n: int) -> int:
    """Largest bit size of m_1 whose n-th lift m_n can still have at most b bits.

    From m_n > 4^(n-1) m_1^n and m_n < 2^b: ceil((b + 2) / n) - 2.
    """
    if b < 2 or n < 1:
        raise ValueError(f"need b >= 2 and n >= 1, got b={b}, n={n}")
    T = -(-(b + 2) // n) - 2
    if T < 1:
        raise NoCandidatesError(f"no m_1 can reach {b} bits at index {n}")
    return T
